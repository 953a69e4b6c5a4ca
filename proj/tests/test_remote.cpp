// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <chrono>
#include <json.hpp>
#include <thread>

#include "refrag/error.hpp"
#include "refrag/remote.hpp"
#include "stub_server.hpp"

using namespace refrag;
using refrag::testing::StubServer;
using nlohmann::json;

namespace {

RemoteOptions fast(int retries = 2) {
    RemoteOptions o;
    o.retries = retries;
    o.backoff = std::chrono::milliseconds(0);
    o.timeout = std::chrono::milliseconds(5000);
    return o;
}

void reply(httplib::Response& res, const json& body) { res.set_content(body.dump(), "application/json"); }

// Pairwise stub: the score of each input is its (1-based) position / 10.
void positional_scores(const httplib::Request& req, httplib::Response& res, int) {
    const auto in = json::parse(req.body);
    json scores = json::array();
    for (std::size_t i = 0; i < in["inputs"].size(); ++i) scores.push_back(static_cast<double>(i + 1) / 10.0);
    reply(res, {{"scores", scores}});
}

}  // namespace

TEST_SUITE("remote") {
    TEST_CASE("endpoint parsing") {
        const auto ep = Endpoint::parse("http://localhost:9000/v1/score");
        CHECK(ep.base == "http://localhost:9000");
        CHECK(ep.path == "/v1/score");
        CHECK(Endpoint::parse("http://host").path == "/");
        CHECK_THROWS_AS(Endpoint::parse("https://host/x"), UsageError);
        CHECK_THROWS_AS(Endpoint::parse("localhost:9000"), UsageError);
        CHECK_THROWS_AS(Endpoint::parse(""), UsageError);
    }

    TEST_CASE("no pairs, no request") {
        StubServer stub(positional_scores);
        const RemoteScorer scorer(Endpoint::parse(stub.url()), RemoteMode::pairwise, "[SEP]", fast(), "rerank scorer");
        const auto out = scorer.remote_score_batch({});
        CHECK(out.scores.empty());
        CHECK(stub.calls() == 0);
    }

    TEST_CASE("pairwise echo") {
        StubServer stub([](const httplib::Request&, httplib::Response& res, int) {
            reply(res, {{"scores", {0.1, 0.9, 0.5}}});
        });
        const RemoteScorer scorer(Endpoint::parse(stub.url()), RemoteMode::pairwise, "[SEP]", fast(), "rerank scorer");
        const std::vector<TextPair> pairs{{"q", "a"}, {"q", "b"}, {"q", "c"}};
        CHECK(scorer.score_batch(pairs) == std::vector<double>{0.1, 0.9, 0.5});
        const auto sent = json::parse(stub.bodies().at(0));
        CHECK(sent["mode"] == "pairwise");
        CHECK(sent["inputs"] == json{"q [SEP] a", "q [SEP] b", "q [SEP] c"});
        CHECK(scorer.identity() == "rerank scorer");
    }

    TEST_CASE("transient failures are retried") {
        StubServer stub([](const httplib::Request& req, httplib::Response& res, int call) {
            if (call < 2) {
                res.status = 503;
                return;
            }
            positional_scores(req, res, call);
        });
        std::vector<std::string> log;
        const RemoteScorer scorer(Endpoint::parse(stub.url()), RemoteMode::pairwise, "[SEP]", fast(3), "rerank scorer",
                                  [&](const std::string& m) { log.push_back(m); });
        const std::vector<TextPair> pairs{{"q", "a"}, {"q", "b"}};
        const auto out = scorer.remote_score_batch(pairs);
        CHECK(out.scores == std::vector<double>{0.1, 0.2});
        CHECK(out.retries == 2);
        CHECK(log.size() == 2);
        CHECK(stub.calls() == 3);
    }

    TEST_CASE("429 is retried, other 4xx is not") {
        StubServer busy([](const httplib::Request& req, httplib::Response& res, int call) {
            if (call == 0) {
                res.status = 429;
                return;
            }
            positional_scores(req, res, call);
        });
        const RemoteScorer a(Endpoint::parse(busy.url()), RemoteMode::pairwise, "[SEP]", fast(), "s");
        const std::vector<TextPair> one{{"q", "a"}};
        CHECK(a.remote_score_batch(one).retries == 1);

        StubServer missing([](const httplib::Request&, httplib::Response& res, int) { res.status = 404; });
        const RemoteScorer b(Endpoint::parse(missing.url()), RemoteMode::pairwise, "[SEP]", fast(), "s");
        CHECK_THROWS_AS(b.score_batch(one), ScoringError);
        CHECK(missing.calls() == 1);
    }

    TEST_CASE("exhausted retries name the endpoint, batch and backend") {
        StubServer stub([](const httplib::Request& req, httplib::Response& res, int call) {
            if (call == 0) return positional_scores(req, res, call);
            res.status = 500;
        });
        RemoteOptions o = fast(1);
        o.batch_size = 2;
        const RemoteScorer scorer(Endpoint::parse(stub.url()), RemoteMode::pairwise, "[SEP]", o, "rerank scorer");
        const std::vector<TextPair> pairs{{"q", "a"}, {"q", "b"}, {"q", "c"}};
        try {
            scorer.score_batch(pairs);
            FAIL("expected ScoringError");
        } catch (const ScoringError& e) {
            const std::string msg = e.what();
            CHECK(e.kind() == ErrorKind::backend);
            CHECK(e.pair_index() == 2);
            CHECK(e.backend() == "rerank scorer");
            CHECK(msg.find(stub.url()) != std::string::npos);
            CHECK(msg.find("batch 1") != std::string::npos);
        }
        CHECK(stub.calls() == 3);
    }

    TEST_CASE("connection failures are retried then reported") {
        std::string url;
        {
            StubServer gone(positional_scores);
            url = gone.url();
        }
        const RemoteScorer scorer(Endpoint::parse(url), RemoteMode::pairwise, "[SEP]", fast(2), "retrieval scorer");
        const std::vector<TextPair> one{{"q", "a"}};
        try {
            scorer.score_batch(one);
            FAIL("expected ScoringError");
        } catch (const ScoringError& e) {
            CHECK(std::string(e.what()).find("3 attempts") != std::string::npos);
        }
    }

    TEST_CASE("malformed responses are protocol errors") {
        StubServer garbage([](const httplib::Request&, httplib::Response& res, int) {
            res.set_content("not json", "application/json");
        });
        const std::vector<TextPair> one{{"q", "a"}};
        const RemoteScorer a(Endpoint::parse(garbage.url()), RemoteMode::pairwise, "[SEP]", fast(), "s");
        CHECK_THROWS_WITH_AS(a.score_batch(one), doctest::Contains("malformed JSON"), ScoringError);
        CHECK(garbage.calls() == 1);

        StubServer short_reply([](const httplib::Request&, httplib::Response& res, int) { reply(res, {{"scores", {1.0}}}); });
        const RemoteScorer b(Endpoint::parse(short_reply.url()), RemoteMode::pairwise, "[SEP]", fast(), "s");
        const std::vector<TextPair> two{{"q", "a"}, {"q", "b"}};
        CHECK_THROWS_WITH_AS(b.score_batch(two), doctest::Contains("'scores'"), ScoringError);

        StubServer strings([](const httplib::Request&, httplib::Response& res, int) { reply(res, {{"scores", {"x"}}}); });
        const RemoteScorer c(Endpoint::parse(strings.url()), RemoteMode::pairwise, "[SEP]", fast(), "s");
        CHECK_THROWS_AS(c.score_batch(one), ScoringError);
    }

    TEST_CASE("batches preserve order") {
        StubServer stub(positional_scores);
        RemoteOptions o = fast();
        o.batch_size = 2;
        const RemoteScorer scorer(Endpoint::parse(stub.url()), RemoteMode::pairwise, "[SEP]", o, "s");
        const std::vector<TextPair> five{{"q", "a"}, {"q", "b"}, {"q", "c"}, {"q", "d"}, {"q", "e"}};
        CHECK(scorer.score_batch(five) == std::vector<double>{0.1, 0.2, 0.1, 0.2, 0.1});
        CHECK(stub.calls() == 3);
    }

    TEST_CASE("embed mode scores by inner product") {
        StubServer stub([](const httplib::Request& req, httplib::Response& res, int) {
            const auto in = json::parse(req.body);
            json vectors = json::array();
            for (const auto& text : in["inputs"]) {
                const auto s = text.get<std::string>();
                vectors.push_back({static_cast<double>(s.size()), 1.0});
            }
            reply(res, {{"vectors", vectors}});
        });
        const RemoteScorer scorer(Endpoint::parse(stub.url()), RemoteMode::embed_similarity, "[SEP]", fast(), "s");
        const std::vector<TextPair> pairs{{"ab", "abc"}, {"a", "a"}};
        CHECK(scorer.score_batch(pairs) == std::vector<double>{2.0 * 3.0 + 1.0, 1.0 + 1.0});
        const auto sent = json::parse(stub.bodies().at(0));
        CHECK(sent["mode"] == "embed");
        CHECK(sent["inputs"] == json{"ab", "abc", "a", "a"});

        StubServer ragged([](const httplib::Request&, httplib::Response& res, int) {
            reply(res, {{"vectors", {{1.0}, {1.0, 2.0}}}});
        });
        const RemoteScorer bad(Endpoint::parse(ragged.url()), RemoteMode::embed_similarity, "[SEP]", fast(), "s");
        const std::vector<TextPair> one{{"a", "b"}};
        CHECK_THROWS_AS(bad.score_batch(one), ScoringError);
    }

    TEST_CASE("in-flight limit") {
        StubServer stub([](const httplib::Request& req, httplib::Response& res, int call) {
            std::this_thread::sleep_for(std::chrono::milliseconds(30));
            positional_scores(req, res, call);
        });
        RemoteOptions o = fast();
        o.max_in_flight = 1;
        const RemoteScorer scorer(Endpoint::parse(stub.url()), RemoteMode::pairwise, "[SEP]", o, "s");
        std::vector<std::thread> threads;
        for (int t = 0; t < 4; ++t) {
            threads.emplace_back([&] {
                const std::vector<TextPair> one{{"q", "a"}};
                scorer.score_batch(one);
            });
        }
        for (auto& t : threads) t.join();
        CHECK(stub.calls() == 4);
        CHECK(stub.max_active() == 1);
    }

    TEST_CASE("remote generator") {
        StubServer stub([](const httplib::Request&, httplib::Response& res, int) { reply(res, {{"text", "X. Y."}}); });
        const RemoteGenerator gen(Endpoint::parse(stub.url("/generate")), "Use the documents.", 256, fast());
        const std::vector<ContextChunk> ctx{{"a", "## Test Name: T\n\nbody", "body"}};
        CHECK(gen.generate("why?", ctx) == std::vector<std::string>{"X.", "Y."});
        const auto sent = json::parse(stub.bodies().at(0));
        CHECK(sent["max_tokens"] == 256);
        CHECK(sent["prompt"] == "Use the documents.\n\n[1]\n## Test Name: T\n\nbody\n\nQuestion: why?");
        CHECK(gen.identity() == "remote:" + stub.url("/generate"));

        StubServer blank([](const httplib::Request&, httplib::Response& res, int) { reply(res, {{"text", "   "}}); });
        const RemoteGenerator empty(Endpoint::parse(blank.url()), "i", 8, fast());
        CHECK_THROWS_AS(empty.generate("q", ctx), BackendError);

        StubServer wrong([](const httplib::Request&, httplib::Response& res, int) { reply(res, {{"answer", "x"}}); });
        const RemoteGenerator proto(Endpoint::parse(wrong.url()), "i", 8, fast());
        CHECK_THROWS_AS(proto.generate("q", ctx), ProtocolError);
    }
}
