// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "refrag/config.hpp"
#include "refrag/corpus.hpp"
#include "refrag/evalkit.hpp"
#include "refrag/pipeline.hpp"
#include "refrag/refmatch.hpp"
#include "refrag/scoring.hpp"

namespace refrag {

struct QueryOptions {
    std::size_t n = 10;
    std::size_t k = 5;
    double threshold = 0.0;
    double tie_epsilon = 0.0;
    MatchMode mode = MatchMode::paper_literal;
    TextVersion version = TextVersion::ver1;
    std::string qid;
};

struct QueryResult {
    RankedList retrieved;
    RankedList reranked;
    GeneratedAnswer answer;
    ReferenceAlignment alignment;
};

/// Retrieve -> re-rank -> generate -> match over one sealed store. All
/// methods are const and safe to call concurrently once loading is done.
class Engine {
public:
    /// Builds scorer and generator backends from `config`.
    explicit Engine(Config config);
    /// Uses caller-supplied backends (tests, embedding).
    Engine(Config config, std::shared_ptr<const Scorer> retrieval_scorer,
           std::shared_ptr<const Scorer> rerank_scorer, std::shared_ptr<const Generator> generator);

    void load_corpus(const std::string& path);
    void set_store(ChunkStore store);
    void load_qa(const std::string& path);

    bool has_store() const { return store_ != nullptr; }
    const ChunkStore& store() const;
    const std::vector<QAPair>& qa() const { return qa_; }
    const Config& config() const { return config_; }

    const Scorer& retrieval_scorer() const { return *retrieval_scorer_; }
    const Scorer& rerank_scorer() const { return *rerank_scorer_; }
    const Generator& generator() const { return *generator_; }

    QueryOptions default_options() const;
    /// Defaults overridden by keys n, k, threshold, tie_epsilon, mode, version, qid.
    QueryOptions options_from_json(const nlohmann::json& request) const;

    RankedList retrieve(const std::string& question, const QueryOptions& opts) const;
    /// Retrieval followed by re-ranking.
    std::pair<RankedList, RankedList> retrieve_and_rerank(const std::string& question, const QueryOptions& opts) const;
    QueryResult query(const std::string& question, const QueryOptions& opts) const;

    /// Matches pre-split sentences against stored chunks (rendered with
    /// opts.version) or against inline texts. Matching uses the re-rank scorer.
    ReferenceAlignment match(const std::vector<std::string>& sentences, const std::vector<MatchChunk>& chunks,
                             const QueryOptions& opts) const;
    std::vector<MatchChunk> resolve_chunks(const std::vector<std::string>& ids, TextVersion version) const;

    std::vector<TrainingPair> export_pairs(std::uint64_t seed) const;

    /// Runs for every QA pair in `split`: one per pipeline stage.
    std::vector<eval::RunEntry> run_stage(Stage stage, Split split, const QueryOptions& opts) const;
    eval::GoldMap gold() const;

private:
    Config config_;
    std::shared_ptr<const ChunkStore> store_;
    std::vector<QAPair> qa_;
    std::shared_ptr<const Scorer> retrieval_scorer_;
    std::shared_ptr<const Scorer> rerank_scorer_;
    std::shared_ptr<const Generator> generator_;
};

/// Response shape shared by the CLI and /v1/query.
nlohmann::json query_to_json(const QueryResult& result, const ChunkStore& store);

/// Ingest summary: corpus size and per-source / per-split counts.
nlohmann::json describe(const Engine& engine);

}  // namespace refrag
