// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include "groundcheck/http_client.hpp"

#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "groundcheck/error.hpp"

namespace groundcheck {

RemoteEndpoint RemoteEndpoint::from_env(const char* url_var, const char* token_var) {
    RemoteEndpoint endpoint;
    if (const char* url = std::getenv(url_var)) endpoint.base_url = url;
    if (const char* token = std::getenv(token_var)) endpoint.token = token;
    return endpoint;
}

HttpJsonClient::HttpJsonClient(RemoteEndpoint endpoint)
    : endpoint_(std::move(endpoint)), sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    const std::string& url = endpoint_.base_url;
    auto scheme_end = url.find("://");
    if (url.empty() || scheme_end == std::string::npos) {
        throw_validation(fmt::format("remote endpoint URL '{}' must look like http://host:port[/prefix]", url));
    }
    if (url.compare(0, scheme_end, "http") != 0) {
        throw_validation(fmt::format("unsupported URL scheme in '{}' (only http is built in)", url));
    }
    auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (endpoint_.retry.attempts < 1) throw_validation("retry attempts must be >= 1");
}

std::string HttpJsonClient::post(std::string_view path, const std::string& json_body) const {
    const std::string target = path_prefix_ + std::string(path);
    httplib::Client client(scheme_host_port_);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers;
    if (!endpoint_.token.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.token);

    std::string last_error;
    auto backoff = endpoint_.retry.initial_backoff;
    for (int attempt = 1; attempt <= endpoint_.retry.attempts; ++attempt) {
        ++attempts_;
        auto result = client.Post(target, headers, json_body, "application/json");
        if (result) {
            if (result->status >= 200 && result->status < 300) return result->body;
            if (result->status < 500) {
                throw_backend(fmt::format("POST {}{} returned HTTP {}", endpoint_.base_url, path, result->status));
            }
            last_error = fmt::format("HTTP {}", result->status);
        } else {
            last_error = httplib::to_string(result.error());
        }
        if (attempt < endpoint_.retry.attempts) {
            sleeper_(backoff);
            backoff *= 2;
        }
    }
    throw_backend(fmt::format("POST {}{} failed after {} attempts: {}", endpoint_.base_url, path,
                              endpoint_.retry.attempts, last_error));
}

}  // namespace groundcheck
