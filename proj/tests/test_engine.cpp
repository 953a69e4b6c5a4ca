// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>

#include "refrag/engine.hpp"
#include "refrag/error.hpp"
#include "support.hpp"

using namespace refrag;
using refrag::testing::fixture;
using nlohmann::json;

namespace {

Engine fixture_engine() {
    Config cfg;
    cfg.n = 5;
    cfg.k = 3;
    Engine engine(cfg);
    engine.load_corpus(fixture("corpus.jsonl"));
    engine.load_qa(fixture("qa.jsonl"));
    return engine;
}

}  // namespace

TEST_SUITE("engine") {
    TEST_CASE("loading and description") {
        const auto engine = fixture_engine();
        const auto d = describe(engine);
        CHECK(d["chunks"] == 9);
        CHECK(d["by_source"]["test_report"] == 3);
        CHECK(d["by_source"]["meeting_note"] == 3);
        CHECK(d["by_source"]["textbook"] == 3);
        CHECK(d["by_split"]["train"] == 7);
        CHECK(d["qa_pairs"] == 12);
        CHECK(d["qa_by_split"]["train"] == 8);
        CHECK(d["qa_by_split"]["val"] == 2);
        CHECK(d["qa_by_split"]["test"] == 2);
    }

    TEST_CASE("no corpus") {
        const Engine engine{Config{}};
        CHECK_FALSE(engine.has_store());
        CHECK_THROWS_AS(engine.store(), UsageError);
        CHECK_THROWS_AS(engine.export_pairs(1), UsageError);
    }

    TEST_CASE("query is deterministic and segments cite re-ranked chunks") {
        const auto engine = fixture_engine();
        const auto opts = engine.default_options();
        const std::string q = "Why did the side pole impact test in the US fail?";
        const auto a = engine.query(q, opts);
        const auto b = engine.query(q, opts);
        CHECK(query_to_json(a, engine.store()).dump() == query_to_json(b, engine.store()).dump());

        CHECK(a.retrieved.entries.size() == 5);
        CHECK(a.reranked.entries.size() == 3);
        const auto ids = a.reranked.ids();
        const std::set<std::string> reranked(ids.begin(), ids.end());
        CHECK(a.reranked.entries.front().chunk_id == "TR-0002");
        REQUIRE_FALSE(a.alignment.segments.empty());
        CHECK(a.alignment.sentence_count() == a.answer.sentences.size());
        for (const auto& s : a.alignment.segments) {
            for (const auto& id : s.chunk_ids) CHECK(reranked.count(id) == 1);
        }
        const auto j = query_to_json(a, engine.store());
        for (const auto& s : j["segments"]) {
            for (const auto& id : s["chunk_ids"]) CHECK(j["chunk_bodies"].contains(id.get<std::string>()));
        }
    }

    TEST_CASE("request options") {
        const auto engine = fixture_engine();
        const auto o = engine.options_from_json(json{{"n", 4}, {"k", 2}, {"mode", "global-sum"}, {"version", "ver0"}});
        CHECK(o.n == 4);
        CHECK(o.k == 2);
        CHECK(o.mode == MatchMode::global_sum);
        CHECK(o.version == TextVersion::ver0);
        CHECK_THROWS_WITH_AS(engine.options_from_json(json{{"k", 10}}), doctest::Contains("must not exceed n"),
                             UsageError);
        CHECK_THROWS_AS(engine.options_from_json(json{{"n", 0}}), UsageError);
        CHECK_THROWS_AS(engine.options_from_json(json{{"threshold", "high"}}), UsageError);
        CHECK_THROWS_AS(engine.options_from_json(json{{"tie_epsilon", -1}}), UsageError);
        CHECK_THROWS_AS(engine.options_from_json(json::array()), UsageError);

        auto bad = engine.default_options();
        bad.k = bad.n + 1;
        CHECK_THROWS_AS(engine.query("chest deflection", bad), UsageError);
        CHECK_THROWS_AS(engine.query("   ", engine.default_options()), UsageError);
    }

    TEST_CASE("n larger than the corpus") {
        const auto engine = fixture_engine();
        auto opts = engine.default_options();
        opts.n = 50;
        opts.k = 20;
        const auto r = engine.query("roof crush", opts);
        CHECK(r.retrieved.entries.size() == 9);
        CHECK(r.reranked.entries.size() == 9);
    }

    TEST_CASE("resolving chunk ids") {
        const auto engine = fixture_engine();
        const auto chunks = engine.resolve_chunks({"TR-0001", "MN-0002"}, TextVersion::ver1);
        REQUIRE(chunks.size() == 2);
        CHECK(chunks[0].id == "TR-0001");
        CHECK(chunks[0].text.rfind("## Test Name: HGC frontal\n", 0) == 0);
        CHECK(engine.resolve_chunks({"TR-0001"}, TextVersion::ver0)[0].text ==
              engine.store().at("TR-0001").body);
        CHECK_THROWS_WITH_AS(engine.resolve_chunks({"NOPE"}, TextVersion::ver1), doctest::Contains("NOPE"),
                             UsageError);
        CHECK_THROWS_AS(engine.resolve_chunks({"TR-0001", "TR-0001"}, TextVersion::ver1), UsageError);
    }

    TEST_CASE("stage runs cover the split") {
        const auto engine = fixture_engine();
        const auto run = engine.run_stage(Stage::reranking, Split::train, engine.default_options());
        CHECK(run.size() == 8);
        for (const auto& entry : run) {
            CHECK(entry.ranked.size() == 3);
            CHECK_FALSE(entry.failed);
        }
        const auto gold = engine.gold();
        CHECK(gold.at("Q11") == std::set<std::string>{"TB-0001", "TR-0001"});
    }

    TEST_CASE("training pairs") {
        const auto engine = fixture_engine();
        const auto a = engine.export_pairs(7);
        CHECK(to_jsonl(a) == to_jsonl(engine.export_pairs(7)));
        std::size_t positives = 0;
        for (const auto& p : a) positives += p.label == 1 ? 1 : 0;
        CHECK(positives == 8);
        CHECK(a.size() == 8 * 4);
    }
}
