#pragma once

/// HTTP/1.1 binding for famvar::Service.

#include <string>

#include <httplib.h>

#include "famvar/service.hpp"

namespace famvar {

/// Routes every GET/POST/DELETE on `server` to `service`.
inline void mount(httplib::Server& server, Service& service) {
    auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
        auto out = service.handle(req.method, req.path, req.body);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    server.Get(R"(/.*)", forward);
    server.Post(R"(/.*)", forward);
    server.Delete(R"(/.*)", forward);
}

/// Blocks serving on host:port until the server is stopped.
inline bool serve(Service& service, const std::string& host, int port) {
    httplib::Server server;
    mount(server, service);
    return server.listen(host, port);
}

}  // namespace famvar
