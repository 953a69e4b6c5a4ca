// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <httplib.h>

#include <set>
#include <thread>

#include "refrag/error.hpp"
#include "refrag/service.hpp"
#include "support.hpp"

using namespace refrag;
using refrag::testing::fixture;
using nlohmann::json;

namespace {

Config service_config() {
    Config cfg;
    cfg.n = 5;
    cfg.k = 3;
    return cfg;
}

std::shared_ptr<const Engine> fixture_engine(const Config& cfg) {
    auto engine = std::make_shared<Engine>(cfg);
    engine->load_corpus(fixture("corpus.jsonl"));
    engine->load_qa(fixture("qa.jsonl"));
    return engine;
}

class DownScorer final : public Scorer {
public:
    double score(std::string_view, std::string_view) const override {
        throw BackendError("retrieval scorer", "retrieval scorer at http://127.0.0.1:1/embed failed after 3 attempts");
    }
    std::string identity() const override { return "down"; }
};

HttpResponse post(const Service& s, const std::string& path, const json& body) {
    return s.handle("POST", path, body.dump());
}

}  // namespace

TEST_SUITE("service") {
    TEST_CASE("503 until the engine is installed") {
        Service s(service_config());
        CHECK(s.handle("GET", "/v1/health", "").status == 503);
        const auto r = post(s, "/v1/query", {{"question", "roof crush"}});
        CHECK(r.status == 503);
        CHECK(r.body["error"]["code"] == "starting");
        s.set_engine(fixture_engine(service_config()));
        CHECK(s.handle("GET", "/v1/health", "").status == 200);
    }

    TEST_CASE("engine without corpus is refused") {
        Service s(service_config());
        CHECK_THROWS_AS(s.set_engine(std::make_shared<Engine>(service_config())), UsageError);
    }

    TEST_CASE("routes") {
        const auto cfg = service_config();
        Service s(cfg);
        s.set_engine(fixture_engine(cfg));

        SUBCASE("health") {
            const auto r = s.handle("GET", "/v1/health", "");
            CHECK(r.body["status"] == "ok");
            CHECK(r.body["corpus_size"] == 9);
            CHECK(r.body["backends"]["retrieval"] == "lexical");
            CHECK(r.body["backends"]["generator"] == "extractive");
            CHECK(r.body["defaults"]["k"] == 3);
        }

        SUBCASE("query") {
            const auto r = post(s, "/v1/query", {{"question", "Why did the side pole impact test in the US fail?"}});
            REQUIRE(r.status == 200);
            CHECK(r.body["reranked"].size() == 3);
            std::set<std::string> reranked;
            for (const auto& e : r.body["reranked"]) reranked.insert(e["chunk_id"].get<std::string>());
            for (const auto& seg : r.body["segments"]) {
                for (const auto& id : seg["chunk_ids"]) CHECK(reranked.count(id.get<std::string>()) == 1);
            }
            CHECK(post(s, "/v1/query", {{"question", "Why did the side pole impact test in the US fail?"}}).body ==
                  r.body);
        }

        SUBCASE("query validation") {
            auto r = post(s, "/v1/query", {{"question", "  "}});
            CHECK(r.status == 400);
            CHECK(r.body["error"]["code"] == "empty_question");
            CHECK(post(s, "/v1/query", json::object()).body["error"]["code"] == "empty_question");
            r = post(s, "/v1/query", {{"question", "roof"}, {"k", 10}});
            CHECK(r.status == 400);
            CHECK(r.body["error"]["code"] == "invalid_request");
            CHECK(s.handle("POST", "/v1/query", "{not json").status == 400);
            CHECK(s.handle("POST", "/v1/query", "[1]").status == 400);
        }

        SUBCASE("match against stored chunks") {
            const json req{{"sentences", {"The curtain airbag deployed 4 ms late.", "Rib deflection exceeded the limit."}},
                           {"chunk_ids", {"TR-0002", "TB-0001"}},
                           {"threshold", 0.0}};
            const auto low = post(s, "/v1/match", req);
            REQUIRE(low.status == 200);
            auto high_req = req;
            high_req["threshold"] = 0.3;
            const auto high = post(s, "/v1/match", high_req);
            REQUIRE(high.status == 200);
            REQUIRE(low.body["segments"].size() == high.body["segments"].size());
            for (std::size_t i = 0; i < low.body["segments"].size(); ++i) {
                const auto& a = low.body["segments"][i];
                const auto& b = high.body["segments"][i];
                CHECK(a["start"] == b["start"]);
                CHECK(a["end"] == b["end"]);
                CHECK(a["chunk_ids"] == b["chunk_ids"]);
                if (b["referenced"].get<bool>()) CHECK(a["referenced"].get<bool>());
            }
        }

        SUBCASE("match with inline chunks") {
            const auto r = post(s, "/v1/match", {{"sentences", {"alpha beta", "gamma delta"}},
                                                 {"chunks", {{{"id", "x"}, {"text", "alpha beta"}},
                                                             {{"id", "y"}, {"text", "gamma delta"}}}},
                                                 {"mode", "global-sum"}});
            REQUIRE(r.status == 200);
            REQUIRE(r.body["segments"].size() == 2);
            CHECK(r.body["segments"][0]["chunk_ids"] == json{"x"});
            CHECK(r.body["segments"][1]["chunk_ids"] == json{"y"});
        }

        SUBCASE("match validation") {
            auto r = post(s, "/v1/match", {{"sentences", {"a"}}, {"chunk_ids", {"TR-0001", "NOPE"}}});
            CHECK(r.status == 400);
            CHECK(r.body["error"]["message"].get<std::string>().find("NOPE") != std::string::npos);
            CHECK(post(s, "/v1/match", {{"sentences", json::array()}, {"chunk_ids", {"TR-0001"}}}).status == 400);
            CHECK(post(s, "/v1/match", {{"sentences", {"a"}}, {"chunk_ids", json::array()}}).status == 400);
            CHECK(post(s, "/v1/match", {{"sentences", {"a"}}}).status == 400);
            CHECK(post(s, "/v1/match", {{"sentences", {"a"}}, {"chunks", {{{"id", "x"}}}}}).status == 400);
        }

        SUBCASE("chunk lookup") {
            auto r = s.handle("GET", "/v1/chunks/TR-0001", "");
            REQUIRE(r.status == 200);
            CHECK(r.body["chunk"]["id"] == "TR-0001");
            CHECK(r.body["ver1"].get<std::string>().rfind("## Test Name: HGC frontal\n", 0) == 0);
            CHECK(r.body["ver0"] == r.body["chunk"]["body"]);
            r = s.handle("GET", "/v1/chunks/TB-0001", "");
            CHECK(r.body["ver0"] == r.body["ver1"]);
            CHECK(s.handle("GET", "/v1/chunks/NOPE", "").status == 404);
        }

        SUBCASE("methods and unknown routes") {
            CHECK(s.handle("GET", "/v1/query", "").status == 405);
            CHECK(s.handle("POST", "/v1/health", "{}").status == 405);
            CHECK(s.handle("POST", "/v1/chunks/TR-0001", "{}").status == 405);
            CHECK(s.handle("GET", "/v2/query", "").status == 404);
        }
    }

    TEST_CASE("oversized match requests are rejected") {
        auto cfg = service_config();
        cfg.max_match_cells = 4;
        Service s(cfg);
        s.set_engine(fixture_engine(cfg));
        const auto r = post(s, "/v1/match", {{"sentences", {"a", "b", "c"}}, {"chunk_ids", {"TR-0001", "TR-0002"}}});
        CHECK(r.status == 413);
        CHECK(r.body["error"]["code"] == "too_large");
    }

    TEST_CASE("backend failures map to 502 and name the backend") {
        const auto cfg = service_config();
        auto down = std::make_shared<DownScorer>();
        auto engine = std::make_shared<Engine>(cfg, down, down, std::make_shared<ExtractiveGenerator>(1));
        engine->load_corpus(fixture("corpus.jsonl"));
        Service s(cfg);
        s.set_engine(engine);
        const auto r = post(s, "/v1/query", {{"question", "roof crush"}});
        CHECK(r.status == 502);
        CHECK(r.body["error"]["code"] == "backend_failure");
        CHECK(r.body["error"]["backend"] == "retrieval scorer");
        CHECK(r.body["error"]["message"].get<std::string>().find("retrieval scorer") != std::string::npos);
    }

    TEST_CASE("http round trip") {
        auto cfg = service_config();
        cfg.cors_origin = "http://localhost:5173";
        Service s(cfg);
        const int port = s.bind("127.0.0.1:0");
        REQUIRE(port > 0);
        std::thread server([&] { s.run(); });

        httplib::Client client("127.0.0.1", port);
        for (int i = 0; i < 100 && !client.Get("/v1/health"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
        auto res = client.Get("/v1/health");
        REQUIRE(res);
        CHECK(res->status == 503);

        s.set_engine(fixture_engine(cfg));
        res = client.Get("/v1/health");
        REQUIRE(res);
        CHECK(res->status == 200);
        CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");

        res = client.Post("/v1/query", json{{"question", "roof crush strength"}}.dump(), "application/json");
        REQUIRE(res);
        CHECK(res->status == 200);
        CHECK(json::parse(res->body).contains("segments"));

        res = client.Options("/v1/match");
        REQUIRE(res);
        CHECK(res->status == 204);
        CHECK(res->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

        res = client.Get("/v1/chunks/TR-0003");
        REQUIRE(res);
        CHECK(json::parse(res->body)["chunk"]["id"] == "TR-0003");

        s.stop();
        server.join();
    }
}
