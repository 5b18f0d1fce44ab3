#pragma once

#include <memory>
#include <string>

#include "ohc/annotation.hpp"

namespace ohc {

/// HTTP/JSON front end of an AnnotationStore. Errors are answered with a
/// {"code", "message"} body and a matching status.
class AnnotationServer {
public:
    explicit AnnotationServer(AnnotationStore& store);
    ~AnnotationServer();
    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds to an ephemeral port and returns it; -1 on failure.
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    /// Blocks until stop() is called.
    bool listen_after_bind();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ohc
