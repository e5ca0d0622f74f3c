#pragma once

#include "famvar/configuration.hpp"
#include "famvar/configure.hpp"
#include "famvar/derive.hpp"
#include "famvar/diagnostic.hpp"
#include "famvar/document.hpp"
#include "famvar/io.hpp"
#include "famvar/model.hpp"
#include "famvar/session.hpp"
#include "famvar/trace.hpp"
