// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <string>
#include <string_view>

namespace groundcheck {

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{250};
};

/// Where a remote judge or generator lives.
struct RemoteEndpoint {
    /// e.g. "http://127.0.0.1:8080" or "http://host:8080/api/v1".
    std::string base_url;
    std::string token;
    std::chrono::milliseconds timeout{30000};
    RetryPolicy retry;

    /// Reads `url_var` / `token_var`. Missing variables leave fields empty.
    static RemoteEndpoint from_env(const char* url_var, const char* token_var);
};

/// Blocking JSON-over-HTTP POST with bounded retries.
///
/// Transport failures and 5xx replies are retried with exponential backoff
/// (initial_backoff, 2x, 4x, ...); after the last attempt a Backend error is
/// thrown. 4xx replies fail immediately.
class HttpJsonClient {
public:
    explicit HttpJsonClient(RemoteEndpoint endpoint);

    /// POSTs `json_body` to base path + `path`, returns the reply body.
    std::string post(std::string_view path, const std::string& json_body) const;

    const RemoteEndpoint& endpoint() const noexcept { return endpoint_; }
    /// Transport attempts made so far (for tests and logs).
    int attempts_made() const noexcept { return attempts_; }

    /// Replaces the sleep between retries; tests use it to avoid real waits.
    void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleeper_ = std::move(sleeper); }

private:
    RemoteEndpoint endpoint_;
    std::string scheme_host_port_;
    std::string path_prefix_;
    std::function<void(std::chrono::milliseconds)> sleeper_;
    mutable std::atomic<int> attempts_{0};
};

}  // namespace groundcheck
