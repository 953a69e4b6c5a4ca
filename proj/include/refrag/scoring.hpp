// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refrag/corpus.hpp"

namespace refrag {

struct TextPair {
    std::string query;
    std::string doc;
};

/// Relevance scorer shared by retrieval, re-ranking and reference matching.
/// Implementations must be pure and safe for concurrent use.
class Scorer {
public:
    virtual ~Scorer() = default;

    /// Higher means more relevant.
    virtual double score(std::string_view query, std::string_view doc) const = 0;

    /// One score per pair, order preserving. The default calls score() per
    /// pair and reports failures as ScoringError with the pair index.
    virtual std::vector<double> score_batch(std::span<const TextPair> pairs) const;

    /// Short label used in reports, e.g. "lexical".
    virtual std::string identity() const = 0;
};

/// Jaccard coefficient over token sets. Throws UsageError naming the side
/// that has no tokens.
double lexical_score(std::string_view query, std::string_view doc);

class LexicalScorer final : public Scorer {
public:
    double score(std::string_view query, std::string_view doc) const override {
        return lexical_score(query, doc);
    }
    std::string identity() const override { return "lexical"; }
};

struct TrainingPair {
    std::string qid;
    std::string question;
    std::string chunk_id;
    std::string chunk_text;
    int label = 0;
};

/// Uniform integer in [0, bound) from a 64-bit Mersenne twister via
/// rejection sampling, so the stream is identical on every platform.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Hard-negative export for cross-encoder training. Only train-split pairs
/// are used; each (qid, gold) yields one positive followed by three negatives
/// drawn without replacement from the ten train-split chunks scoring highest
/// against the question, gold chunks excluded.
std::vector<TrainingPair> export_training_pairs(std::span<const QAPair> pairs, const ChunkStore& store,
                                                const Scorer& scorer, std::uint64_t seed,
                                                TextVersion version = TextVersion::ver1);

constexpr std::size_t kNegativePoolSize = 10;
constexpr std::size_t kNegativesPerPositive = 3;

std::string to_jsonl(std::span<const TrainingPair> pairs);

}  // namespace refrag
