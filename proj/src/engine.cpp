// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/engine.hpp"

#include <cmath>
#include <iostream>
#include <set>

#include "refrag/error.hpp"
#include "refrag/json_io.hpp"
#include "refrag/remote.hpp"

namespace refrag {

namespace {

LogSink stderr_log() {
    return [](const std::string& msg) { std::clog << "refrag: " << msg << '\n'; };
}

std::size_t read_count(const json& v, const char* key) {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
        throw UsageError(std::string("'") + key + "' must be a positive integer");
    }
    return v.get<std::size_t>();
}

double read_real(const json& v, const char* key) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw UsageError(std::string("'") + key + "' must be a finite number");
    }
    return v.get<double>();
}

}  // namespace

Engine::Engine(Config config) : config_(std::move(config)) {
    config_.validate();
    if (config_.scorer == "remote") {
        retrieval_scorer_ = std::make_shared<RemoteScorer>(Endpoint::parse(config_.retrieval_endpoint),
                                                           RemoteMode::embed_similarity, config_.sep_token,
                                                           config_.remote, "retrieval scorer", stderr_log());
        rerank_scorer_ = std::make_shared<RemoteScorer>(Endpoint::parse(config_.rerank_endpoint),
                                                        RemoteMode::pairwise, config_.sep_token, config_.remote,
                                                        "rerank scorer", stderr_log());
    } else {
        retrieval_scorer_ = std::make_shared<LexicalScorer>();
        rerank_scorer_ = retrieval_scorer_;
    }
    if (config_.generator == "remote") {
        generator_ = std::make_shared<RemoteGenerator>(Endpoint::parse(config_.generator_endpoint),
                                                       config_.instruction, config_.max_tokens, config_.remote,
                                                       text::split_sentences, stderr_log());
    } else {
        generator_ = std::make_shared<ExtractiveGenerator>(config_.sentence_budget);
    }
}

Engine::Engine(Config config, std::shared_ptr<const Scorer> retrieval_scorer,
               std::shared_ptr<const Scorer> rerank_scorer, std::shared_ptr<const Generator> generator)
    : config_(std::move(config)),
      retrieval_scorer_(std::move(retrieval_scorer)),
      rerank_scorer_(std::move(rerank_scorer)),
      generator_(std::move(generator)) {
    config_.validate();
}

void Engine::load_corpus(const std::string& path) { set_store(ingest_corpus(path)); }

void Engine::set_store(ChunkStore store) {
    store_ = std::make_shared<const ChunkStore>(std::move(store));
    qa_.clear();
}

void Engine::load_qa(const std::string& path) { qa_ = ingest_qa(path, store()); }

const ChunkStore& Engine::store() const {
    if (!store_) throw UsageError("no corpus loaded");
    return *store_;
}

QueryOptions Engine::default_options() const {
    QueryOptions o;
    o.n = config_.n;
    o.k = config_.k;
    o.threshold = config_.effective_threshold();
    o.tie_epsilon = config_.tie_epsilon;
    o.mode = config_.mode;
    o.version = config_.version;
    return o;
}

QueryOptions Engine::options_from_json(const json& request) const {
    QueryOptions o = default_options();
    if (request.is_null()) return o;
    if (!request.is_object()) throw UsageError("request must be a JSON object");
    for (const auto& [key, v] : request.items()) {
        if (v.is_null()) continue;
        if (key == "n") {
            o.n = read_count(v, "n");
        } else if (key == "k") {
            o.k = read_count(v, "k");
        } else if (key == "threshold") {
            o.threshold = read_real(v, "threshold");
        } else if (key == "tie_epsilon") {
            o.tie_epsilon = read_real(v, "tie_epsilon");
            if (o.tie_epsilon < 0.0) throw UsageError("'tie_epsilon' must be >= 0");
        } else if (key == "mode") {
            auto m = v.is_string() ? parse_match_mode(v.get<std::string>()) : std::nullopt;
            if (!m) throw UsageError("'mode' must be paper-literal or global-sum");
            o.mode = *m;
        } else if (key == "version") {
            auto ver = v.is_string() ? parse_text_version(v.get<std::string>()) : std::nullopt;
            if (!ver) throw UsageError("'version' must be ver0 or ver1");
            o.version = *ver;
        } else if (key == "qid") {
            if (!v.is_string()) throw UsageError("'qid' must be a string");
            o.qid = v.get<std::string>();
        }
    }
    if (o.k > o.n) {
        throw UsageError("k (" + std::to_string(o.k) + ") must not exceed n (" + std::to_string(o.n) + ")");
    }
    return o;
}

RankedList Engine::retrieve(const std::string& question, const QueryOptions& opts) const {
    if (text::trim(question).empty()) throw UsageError("question is empty");
    return refrag::retrieve(question, store(), *retrieval_scorer_, opts.version, opts.n, opts.qid);
}

std::pair<RankedList, RankedList> Engine::retrieve_and_rerank(const std::string& question,
                                                              const QueryOptions& opts) const {
    if (opts.k > opts.n) {
        throw UsageError("k (" + std::to_string(opts.k) + ") must not exceed n (" + std::to_string(opts.n) + ")");
    }
    auto retrieved = retrieve(question, opts);
    const auto k = std::min(opts.k, retrieved.entries.size());
    auto reranked = refrag::rerank(question, retrieved, store(), *rerank_scorer_, opts.version, k);
    return {std::move(retrieved), std::move(reranked)};
}

QueryResult Engine::query(const std::string& question, const QueryOptions& opts) const {
    auto [retrieved, reranked] = retrieve_and_rerank(question, opts);
    auto answer = refrag::generate(question, reranked, store(), *generator_);
    auto alignment = match_references(answer, reranked, store(), *rerank_scorer_,
                                      MatchOptions{opts.threshold, opts.tie_epsilon, opts.mode}, opts.version);
    return {std::move(retrieved), std::move(reranked), std::move(answer), std::move(alignment)};
}

std::vector<MatchChunk> Engine::resolve_chunks(const std::vector<std::string>& ids, TextVersion version) const {
    std::vector<MatchChunk> out;
    std::set<std::string> seen;
    for (const auto& id : ids) {
        if (!seen.insert(id).second) throw UsageError("chunk id \"" + id + "\" listed twice");
        const Chunk* c = store().find(id);
        if (!c) throw UsageError("unknown chunk id \"" + id + "\"");
        out.push_back({c->id, render_chunk_text(*c, version)});
    }
    return out;
}

ReferenceAlignment Engine::match(const std::vector<std::string>& sentences, const std::vector<MatchChunk>& chunks,
                                 const QueryOptions& opts) const {
    return match_references(sentences, chunks, *rerank_scorer_,
                            MatchOptions{opts.threshold, opts.tie_epsilon, opts.mode}, opts.qid);
}

std::vector<TrainingPair> Engine::export_pairs(std::uint64_t seed) const {
    if (qa_.empty()) throw UsageError("export-pairs needs a loaded QA file");
    return export_training_pairs(qa_, store(), *retrieval_scorer_, seed, TextVersion::ver1);
}

std::vector<eval::RunEntry> Engine::run_stage(Stage stage, Split split, const QueryOptions& opts) const {
    std::vector<eval::RunEntry> run;
    for (const auto& qa : qa_) {
        if (qa.split != split) continue;
        auto o = opts;
        o.qid = qa.qid;
        RankedList list = stage == Stage::retrieval ? retrieve(qa.question, o) : retrieve_and_rerank(qa.question, o).second;
        run.push_back({qa.qid, list.ids(), list.entries.empty()});
    }
    return run;
}

eval::GoldMap Engine::gold() const {
    eval::GoldMap out;
    for (const auto& qa : qa_) out[qa.qid] = {qa.gold_chunk_ids.begin(), qa.gold_chunk_ids.end()};
    return out;
}

json query_to_json(const QueryResult& result, const ChunkStore& store) {
    json segments = json::array();
    json bodies = json::object();
    for (const auto& s : result.alignment.segments) {
        segments.push_back(to_json(s));
        for (const auto& id : s.chunk_ids) bodies[id] = store.at(id).body;
    }
    return json{{"qid", result.answer.qid},
                {"answer_sentences", result.answer.sentences},
                {"generator", result.answer.generator},
                {"mode", std::string(to_string(result.alignment.mode))},
                {"threshold", result.alignment.threshold},
                {"segments", segments},
                {"retrieved", to_json(result.retrieved)},
                {"reranked", to_json(result.reranked)},
                {"chunk_bodies", bodies}};
}

json describe(const Engine& engine) {
    const auto& store = engine.store();
    json sources = json::object();
    for (const auto& [s, c] : store.count_by_source()) sources[std::string(to_string(s))] = c;
    json splits = json::object();
    for (const auto& [s, c] : store.count_by_split()) splits[std::string(to_string(s))] = c;
    json out{{"chunks", store.size()}, {"by_source", sources}, {"by_split", splits}};
    if (!engine.qa().empty()) {
        json qa_splits = json::object();
        for (const auto& [s, c] : count_by_split(engine.qa())) qa_splits[std::string(to_string(s))] = c;
        out["qa_pairs"] = engine.qa().size();
        out["qa_by_split"] = qa_splits;
    }
    return out;
}

}  // namespace refrag
