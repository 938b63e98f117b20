// Copyright 2026 The groundcheck Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <chrono>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "groundcheck/error.hpp"
#include "groundcheck/judge.hpp"
#include "groundcheck/prompt.hpp"

using namespace groundcheck;
using json = nlohmann::json;
using namespace std::chrono_literals;

namespace {

// Local stand-in for a judge or generation service.
class StubServer {
public:
    StubServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url(const std::string& prefix = "") const { return "http://127.0.0.1:" + std::to_string(port_) + prefix; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

RemoteEndpoint endpoint(const std::string& url) {
    RemoteEndpoint e;
    e.base_url = url;
    e.token = "secret";
    e.timeout = 2000ms;
    return e;
}

struct SleepLog {
    std::mutex mutex;
    std::vector<std::chrono::milliseconds> waits;
    std::function<void(std::chrono::milliseconds)> sleeper() {
        return [this](std::chrono::milliseconds d) {
            std::lock_guard lock(mutex);
            waits.push_back(d);
        };
    }
};

}  // namespace

TEST_SUITE("remote") {

TEST_CASE("remote judge speaks the nli and decompose contract") {
    StubServer stub;
    json last_nli;
    std::string auth;
    stub.server().Post("/api/nli", [&](const httplib::Request& req, httplib::Response& res) {
        last_nli = json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(json{{"entails", last_nli["premise"] == last_nli["hypothesis"]}}.dump(), "application/json");
    });
    stub.server().Post("/api/decompose", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"claims": ["Fits well.", "Runs small."]})", "application/json");
    });

    auto backend = std::make_shared<RemoteLlmJudge>(endpoint(stub.url("/api")));
    Judge judge(backend);
    auto v = judge.entails("same text", "same text");
    CHECK(v.entails);
    CHECK(v.backend == BackendKind::RemoteLlm);
    CHECK_FALSE(judge.entails("one", "two").entails);
    CHECK(judge.entails("one", "two").cached);
    CHECK(judge.backend_calls() == 2);
    CHECK(auth == "Bearer secret");
    CHECK(last_nli["premise"] == "one");
    CHECK(last_nli["hypothesis"] == "two");
    CHECK(last_nli["prompt"].get<std::string>().find("two") != std::string::npos);

    auto claims = judge.decompose_claims("Fits well and runs small.");
    REQUIRE(claims.size() == 2);
    CHECK(claims[1].text == "Runs small.");
}

TEST_CASE("server errors are retried with exponential backoff") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server().Post("/nli", [&](const httplib::Request&, httplib::Response& res) {
        if (++hits < 3) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"entails": true})", "application/json");
    });
    auto backend = std::make_shared<RemoteLlmJudge>(endpoint(stub.url()));
    SleepLog log;
    backend->client().set_sleeper(log.sleeper());
    CHECK(backend->nli("a", "a"));
    CHECK(hits == 3);
    CHECK(backend->client().attempts_made() == 3);
    CHECK(log.waits == std::vector<std::chrono::milliseconds>{250ms, 500ms});
}

TEST_CASE("persistent failures become backend errors, never verdicts") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server().Post("/nli", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 500;
    });
    auto backend = std::make_shared<RemoteLlmJudge>(endpoint(stub.url()));
    SleepLog log;
    backend->client().set_sleeper(log.sleeper());
    Judge judge(backend);
    try {
        judge.entails("a", "b");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Backend);
    }
    CHECK(hits == 3);
    CHECK(log.waits.size() == 2);
    CHECK(judge.cache_size() == 0);
}

TEST_CASE("client errors are not retried") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server().Post("/nli", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
    });
    auto backend = std::make_shared<RemoteLlmJudge>(endpoint(stub.url()));
    backend->client().set_sleeper([](std::chrono::milliseconds) {});
    CHECK_THROWS_AS(backend->nli("a", "b"), Error);
    CHECK(hits == 1);
}

TEST_CASE("malformed replies are backend errors") {
    StubServer stub;
    stub.server().Post("/nli", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"verdict": "yes"})", "application/json");
    });
    stub.server().Post("/decompose", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json", "text/plain");
    });
    RemoteLlmJudge backend(endpoint(stub.url()));
    try {
        backend.nli("a", "b");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Backend);
    }
    CHECK_THROWS_AS(backend.decompose("x"), Error);
}

TEST_CASE("unreachable endpoint fails after three attempts") {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    RemoteGenerator generator(endpoint("http://127.0.0.1:" + std::to_string(port)));
    SleepLog log;
    generator.client().set_sleeper(log.sleeper());
    AssembledPrompt prompt;
    prompt.record_id = "r";
    try {
        generator.generate(prompt);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Backend);
    }
    CHECK(generator.client().attempts_made() == 3);
    CHECK(log.waits == std::vector<std::chrono::milliseconds>{250ms, 500ms});
}

TEST_CASE("remote generator contract") {
    StubServer stub;
    json seen;
    stub.server().Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        res.set_content(R"({"text": "It grips well [1]."})", "application/json");
    });
    RemoteGenerator generator(endpoint(stub.url()), 64);
    QueryRecord q{"r1", "How is the grip?", EvidenceSet({{1, EvidenceKind::CustomerReview, "Grips well.", {}}})};
    AssembledPrompt prompt = assemble(Variant::Citation, q, TemplateSet::defaults());
    RawResponse r = generator.generate(prompt);
    CHECK(r.text == "It grips well [1].");
    CHECK(r.variant == Variant::Citation);
    CHECK(seen["prompt"] == prompt.text());
    CHECK(seen["max_tokens"] == 64);
}

TEST_CASE("remote backends require a URL and a credential") {
    RemoteEndpoint e;
    CHECK_THROWS_AS(RemoteLlmJudge{e}, Error);
    e.base_url = "http://127.0.0.1:9";
    CHECK_THROWS_AS(RemoteLlmJudge{e}, Error);
    e.token = "t";
    CHECK_NOTHROW(RemoteLlmJudge{e});
    e.base_url = "ftp://x";
    CHECK_THROWS_AS(RemoteLlmJudge{e}, Error);
    CHECK_THROWS_AS(RemoteGenerator(RemoteEndpoint{}), Error);
}

TEST_CASE("endpoint from environment") {
    ::setenv("GC_TEST_URL", "http://localhost:1234", 1);
    ::setenv("GC_TEST_TOKEN", "abc", 1);
    auto e = RemoteEndpoint::from_env("GC_TEST_URL", "GC_TEST_TOKEN");
    CHECK(e.base_url == "http://localhost:1234");
    CHECK(e.token == "abc");
    auto missing = RemoteEndpoint::from_env("GC_TEST_NOPE_URL", "GC_TEST_NOPE_TOKEN");
    CHECK(missing.base_url.empty());
}

}
