#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace famvar {

/// A single finding produced by a validation or parsing step.
struct Diagnostic {
    std::string code;     ///< e.g. DANGLING_DEPENDENCY, SYNTAX
    std::string subject;  ///< offending id or location
    std::string message;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

/// Raised by operations whose contract has an error outcome. Carries the
/// primary code plus every diagnostic that led to it.
class error : public std::runtime_error {
public:
    error(std::string code, std::string subject, std::string message)
        : std::runtime_error(code + " " + subject + ": " + message),
          code_(std::move(code)),
          diagnostics_{Diagnostic{code_, std::move(subject), std::move(message)}} {}

    error(std::string code, Diagnostics diagnostics)
        : std::runtime_error(summarize(code, diagnostics)),
          code_(std::move(code)),
          diagnostics_(std::move(diagnostics)) {}

    const std::string& code() const noexcept { return code_; }
    const Diagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
    static std::string summarize(const std::string& code, const Diagnostics& diags) {
        std::string out = code;
        for (const auto& d : diags) {
            out += "\n  " + d.code + " " + d.subject + ": " + d.message;
        }
        return out;
    }

    std::string code_;
    Diagnostics diagnostics_;
};

inline std::string format_diagnostic(const Diagnostic& d) {
    std::string out = d.code;
    if (!d.subject.empty()) out += " " + d.subject;
    if (!d.message.empty()) out += ": " + d.message;
    return out;
}

}  // namespace famvar
