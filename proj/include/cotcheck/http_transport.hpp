#pragma once

// Default HTTP transport for the generation gateway, kept in its own header
// so metric-only translation units never pull in httplib.

#include <stdexcept>
#include <string>

#include <httplib.h>

#include "cotcheck/gateway.hpp"

namespace cotcheck {

/// POSTs a chat-completions request to `url` (scheme://host[:port]/path).
inline TransportResult http_post_transport(const std::string& url,
                                           const std::string& api_key,
                                           const std::string& body) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw TransportError("endpoint URL missing scheme: " + url);
    }
    const auto path_begin = url.find('/', scheme_end + 3);
    const std::string base = path_begin == std::string::npos ? url : url.substr(0, path_begin);
    const std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);

    httplib::Client client(base);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) throw TransportError("transport failure: " + httplib::to_string(res.error()));
    return TransportResult{res->status, res->body};
}

}  // namespace cotcheck
