// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <json.hpp>
#include <memory>
#include <string>

#include "refrag/refrag.h"

using nlohmann::json;

namespace {

std::string fixture(const std::string& name) { return std::string(REFRAG_FIXTURES) + "/" + name; }

struct EngineHandle {
    refrag_engine* ptr = nullptr;
    ~EngineHandle() { refrag_engine_destroy(ptr); }
};

/// Calls `fn(&out)` and takes ownership of the returned string.
template <typename Fn>
std::pair<refrag_status, json> call(Fn&& fn) {
    char* out = nullptr;
    const refrag_status st = fn(&out);
    json j;
    if (out) {
        const std::string s(out);
        refrag_free_string(out);
        j = json::parse(s, nullptr, false);
        if (j.is_discarded()) j = s;
    }
    return {st, j};
}

void open_fixture(EngineHandle& h, const char* overrides = R"({"n": 5, "k": 3})") {
    REQUIRE(refrag_engine_create(nullptr, overrides, &h.ptr) == REFRAG_OK);
    REQUIRE(refrag_engine_load_corpus(h.ptr, fixture("corpus.jsonl").c_str()) == REFRAG_OK);
    REQUIRE(refrag_engine_load_qa(h.ptr, fixture("qa.jsonl").c_str()) == REFRAG_OK);
}

}  // namespace

TEST_SUITE("capi") {
    TEST_CASE("version and status names") {
        CHECK(std::string(refrag_version()) == "0.1.0");
        CHECK(std::string(refrag_status_name(REFRAG_OK)) == "ok");
        CHECK(std::string(refrag_status_name(REFRAG_ERR_DATA)) == "data error");
        CHECK(std::string(refrag_status_name(static_cast<refrag_status>(42))) == "unknown");
        refrag_free_string(nullptr);
    }

    TEST_CASE("create validates configuration") {
        refrag_engine* e = nullptr;
        CHECK(refrag_engine_create(nullptr, R"({"n": 2, "k": 3})", &e) == REFRAG_ERR_USAGE);
        CHECK(e == nullptr);
        CHECK(std::string(refrag_last_error()).find("must be >= k") != std::string::npos);
        CHECK(refrag_engine_create(nullptr, "{bad", &e) == REFRAG_ERR_USAGE);
        CHECK(refrag_engine_create("/nonexistent.conf", nullptr, &e) == REFRAG_ERR_USAGE);
        CHECK(refrag_engine_create(nullptr, nullptr, nullptr) == REFRAG_ERR_USAGE);

        EngineHandle h;
        REQUIRE(refrag_engine_create(fixture("refrag.conf").c_str(), nullptr, &h.ptr) == REFRAG_OK);
        CHECK(std::string(refrag_last_error()).empty());
        CHECK(refrag_engine_load_corpus(h.ptr, nullptr) == REFRAG_OK);
        CHECK(refrag_engine_load_qa(h.ptr, nullptr) == REFRAG_OK);
        const auto [st, d] = call([&](char** o) { return refrag_engine_describe(h.ptr, o); });
        CHECK(st == REFRAG_OK);
        CHECK(d["qa_pairs"] == 12);
    }

    TEST_CASE("data errors carry file and line") {
        EngineHandle h;
        REQUIRE(refrag_engine_create(nullptr, nullptr, &h.ptr) == REFRAG_OK);
        CHECK(refrag_engine_load_corpus(h.ptr, fixture("corpus_malformed.jsonl").c_str()) == REFRAG_ERR_DATA);
        CHECK(std::string(refrag_last_error()).find("corpus_malformed.jsonl:3") != std::string::npos);
        CHECK(refrag_engine_load_corpus(h.ptr, fixture("corpus_duplicate.jsonl").c_str()) == REFRAG_ERR_DATA);
        CHECK(std::string(refrag_last_error()).find("TR-0001") != std::string::npos);
        CHECK(refrag_engine_load_qa(h.ptr, fixture("qa.jsonl").c_str()) == REFRAG_ERR_USAGE);
        CHECK(refrag_engine_load_corpus(h.ptr, nullptr) == REFRAG_ERR_USAGE);
    }

    TEST_CASE("query, retrieve and rerank") {
        EngineHandle h;
        open_fixture(h);
        const char* req = R"({"question": "Why did the side pole impact test in the US fail?"})";
        const auto [st, q] = call([&](char** o) { return refrag_engine_query(h.ptr, req, o); });
        REQUIRE(st == REFRAG_OK);
        CHECK(q["reranked"].size() == 3);
        CHECK(q["retrieved"].size() == 5);
        const auto [st2, q2] = call([&](char** o) { return refrag_engine_query(h.ptr, req, o); });
        CHECK(q2 == q);

        const auto [rs, r] = call([&](char** o) { return refrag_engine_retrieve(h.ptr, req, o); });
        CHECK(rs == REFRAG_OK);
        CHECK(r["retrieved"] == q["retrieved"]);
        const auto [rrs, rr] = call([&](char** o) { return refrag_engine_rerank(h.ptr, req, o); });
        CHECK(rrs == REFRAG_OK);
        CHECK(rr["reranked"] == q["reranked"]);

        char* out = nullptr;
        CHECK(refrag_engine_query(h.ptr, R"({"question": ""})", &out) == REFRAG_ERR_USAGE);
        CHECK(out == nullptr);
        CHECK(refrag_engine_query(h.ptr, R"({"question": "x", "k": 9})", &out) == REFRAG_ERR_USAGE);
        CHECK(refrag_engine_query(h.ptr, "[]", &out) == REFRAG_ERR_USAGE);
        CHECK(refrag_engine_query(nullptr, req, &out) == REFRAG_ERR_USAGE);
        CHECK(refrag_engine_query(h.ptr, req, nullptr) == REFRAG_ERR_USAGE);
    }

    TEST_CASE("match") {
        EngineHandle h;
        open_fixture(h);
        const auto [st, m] = call([&](char** o) {
            return refrag_engine_match(
                h.ptr, R"({"sentences": ["alpha beta", "gamma delta"], "mode": "global-sum",
                           "chunks": [{"id": "x", "text": "alpha beta"}, {"id": "y", "text": "gamma delta"}]})",
                o);
        });
        REQUIRE(st == REFRAG_OK);
        CHECK(m["mode"] == "global_sum");
        REQUIRE(m["segments"].size() == 2);
        CHECK(m["segments"][1]["chunk_ids"] == json{"y"});

        char* out = nullptr;
        CHECK(refrag_engine_match(h.ptr, R"({"sentences": ["a"], "chunk_ids": ["NOPE"]})", &out) == REFRAG_ERR_USAGE);
        CHECK(std::string(refrag_last_error()).find("NOPE") != std::string::npos);
    }

    TEST_CASE("export pairs") {
        EngineHandle h;
        open_fixture(h);
        const auto [st, a] = call([&](char** o) { return refrag_engine_export_pairs(h.ptr, 3, o); });
        const auto [st2, b] = call([&](char** o) { return refrag_engine_export_pairs(h.ptr, 3, o); });
        REQUIRE(st == REFRAG_OK);
        CHECK(a == b);
        const auto text = a.get<std::string>();
        CHECK(std::count(text.begin(), text.end(), '\n') == 32);
    }

    TEST_CASE("retrieval evaluation") {
        EngineHandle h;
        open_fixture(h);
        const auto req = json{{"runs", {fixture("run.jsonl")}}}.dump();
        const auto [st, r] = call([&](char** o) { return refrag_engine_eval_retrieval(h.ptr, req.c_str(), o); });
        REQUIRE(st == REFRAG_OK);
        const auto& agg = r["reports"]["run"]["aggregates"];
        CHECK(agg["MAP@1"].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(agg["MAP@5"].get<double>() == doctest::Approx(61.0 / 144.0).epsilon(1e-12));
        CHECK(agg["Success@10"].get<double>() == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(r["text"].get<std::string>().find("MAP@10") != std::string::npos);

        const auto [st2, live] =
            call([&](char** o) { return refrag_engine_eval_retrieval(h.ptr, R"({"split": "train"})", o); });
        REQUIRE(st2 == REFRAG_OK);
        CHECK(live["reports"].contains("retrieval"));
        CHECK(live["reports"].contains("reranking"));
        CHECK(live["reports"]["reranking"]["config"]["split"] == "train");

        char* out = nullptr;
        CHECK(refrag_engine_eval_retrieval(h.ptr, R"({"runs": ["/nonexistent.jsonl"]})", &out) == REFRAG_ERR_DATA);
        CHECK(refrag_engine_eval_retrieval(h.ptr, R"({"split": "dev"})", &out) == REFRAG_ERR_USAGE);
    }

    TEST_CASE("match evaluation") {
        EngineHandle h;
        open_fixture(h);
        const auto req = json{{"annotations", fixture("synthetic_annotations.jsonl")},
                              {"alignments", fixture("synthetic_alignments.jsonl")}}
                             .dump();
        const auto [st, r] = call([&](char** o) { return refrag_engine_eval_match(h.ptr, req.c_str(), o); });
        REQUIRE(st == REFRAG_OK);
        REQUIRE(r["curve"].size() == 4);
        CHECK(r["curve"][0]["mean_precision"].get<double>() == doctest::Approx(21.0 / 32.0).epsilon(1e-12));
        CHECK(r["curve"][3]["answers_without_data"] == 2);
        CHECK(r["csv"].get<std::string>().rfind("threshold,", 0) == 0);

        const auto live_req = json{{"annotations", fixture("annotations.jsonl")}}.dump();
        const auto [st2, live] = call([&](char** o) { return refrag_engine_eval_match(h.ptr, live_req.c_str(), o); });
        REQUIRE(st2 == REFRAG_OK);
        CHECK(live["per_answer"].size() == 5);

        char* out = nullptr;
        CHECK(refrag_engine_eval_match(h.ptr, R"({})", &out) == REFRAG_ERR_DATA);
    }

    TEST_CASE("judge evaluation") {
        const auto [st, r] = call([&](char** o) { return refrag_eval_judge(fixture("judge_scores.jsonl").c_str(), o); });
        REQUIRE(st == REFRAG_OK);
        CHECK(r["report"]["scores"]["A"]["correctness"]["average"].get<double>() == doctest::Approx(2.54));
        CHECK(r["report"]["scores"]["B"]["informativeness"]["average"].get<double>() == doctest::Approx(3.68));
        char* out = nullptr;
        CHECK(refrag_eval_judge(fixture("qa.jsonl").c_str(), &out) == REFRAG_ERR_DATA);
        CHECK(refrag_eval_judge(nullptr, &out) == REFRAG_ERR_USAGE);
    }

    TEST_CASE("serve rejects bad setups before blocking") {
        CHECK(refrag_serve(nullptr, R"({"listen": "127.0.0.1:0"})") == REFRAG_ERR_USAGE);
        CHECK(refrag_serve(nullptr, R"({"listen": "nohost", "corpus": "x"})") == REFRAG_ERR_USAGE);
        const auto bad = json{{"listen", "127.0.0.1:0"}, {"corpus", fixture("corpus_malformed.jsonl")}}.dump();
        CHECK(refrag_serve(nullptr, bad.c_str()) == REFRAG_ERR_DATA);
        CHECK(std::string(refrag_last_error()).find(":3") != std::string::npos);
    }
}
