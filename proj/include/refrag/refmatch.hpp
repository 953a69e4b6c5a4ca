// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Reference matching: partitions an answer's sentences into contiguous
// segments and attributes each segment to the retrieved chunk that supports
// it best.
//
// Every contiguous span s_i..s_j (1-based, inclusive) is scored against every
// chunk. Selection then runs in one of two modes:
//
//   paper_literal  For each end position j, best(j) is the (i, t) with the
//                  highest single span score. Starting from j = n, emit
//                  best(j) = (i, j, t) and continue from j = i - 1.
//   global_sum     The partition and assignment maximising the sum of span
//                  scores (prefix DP).
//
// Ties prefer the smaller start i (longer span), then the chunk ranked
// earlier. In global_sum the same order is applied segment by segment from
// the end of the answer backwards.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refrag/corpus.hpp"
#include "refrag/pipeline.hpp"
#include "refrag/scoring.hpp"

namespace refrag {

enum class MatchMode { paper_literal, global_sum };

std::string_view to_string(MatchMode m);
/// Accepts "paper_literal"/"paper-literal" and "global_sum"/"global-sum".
std::optional<MatchMode> parse_match_mode(std::string_view s);

/// A chunk the matcher scores against: id plus the text handed to the scorer.
struct MatchChunk {
    std::string id;
    std::string text;
};

/// Span-by-chunk score table. Indices are 1-based for spans, 0-based for
/// chunk positions.
class SegmentScoreMatrix {
public:
    SegmentScoreMatrix(std::size_t n, std::vector<std::string> chunk_ids);

    std::size_t sentence_count() const { return n_; }
    std::size_t chunk_count() const { return chunk_ids_.size(); }
    const std::vector<std::string>& chunk_ids() const { return chunk_ids_; }
    /// n(n+1)/2 * k
    std::size_t size() const { return scores_.size(); }

    double at(std::size_t i, std::size_t j, std::size_t t) const { return scores_[index(i, j, t)]; }
    void set(std::size_t i, std::size_t j, std::size_t t, double value) { scores_[index(i, j, t)] = value; }

private:
    std::size_t index(std::size_t i, std::size_t j, std::size_t t) const;

    std::size_t n_;
    std::vector<std::string> chunk_ids_;
    std::vector<double> scores_;
};

/// One selected span. `chunk` is the position in the matrix's chunk list.
struct SegmentChoice {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t chunk = 0;
    double score = 0.0;

    bool operator==(const SegmentChoice&) const = default;
};

struct Segment {
    std::size_t start = 0;
    std::size_t end = 0;
    std::vector<std::string> chunk_ids;  // primary first
    double score = 0.0;
    bool referenced = false;

    bool operator==(const Segment&) const = default;
};

struct ReferenceAlignment {
    std::string qid;
    std::vector<Segment> segments;
    double threshold = 0.0;
    MatchMode mode = MatchMode::paper_literal;

    std::size_t sentence_count() const { return segments.empty() ? 0 : segments.back().end; }
};

/// Scores every span against every chunk: exactly n(n+1)/2 * k scorer calls.
/// Spans are joined with single spaces before scoring.
SegmentScoreMatrix build_matrix(std::span<const std::string> sentences, std::span<const MatchChunk> chunks,
                                const Scorer& scorer);

/// Convenience overload: chunks are the ranked list's entries rendered with
/// `version` (ver1 by default).
SegmentScoreMatrix build_matrix(const GeneratedAnswer& answer, const RankedList& chunks, const ChunkStore& store,
                                const Scorer& scorer, TextVersion version = TextVersion::ver1);

std::vector<SegmentChoice> select_segments(const SegmentScoreMatrix& matrix, MatchMode mode);

/// Turns selected spans into segments: attaches every chunk scoring within
/// `tie_epsilon` of the primary, and flags segments scoring >= threshold as
/// referenced.
std::vector<Segment> attach_segments(const SegmentScoreMatrix& matrix, std::span<const SegmentChoice> choices,
                                     double threshold, double tie_epsilon);

struct MatchOptions {
    double threshold = 0.0;
    double tie_epsilon = 0.0;
    MatchMode mode = MatchMode::paper_literal;
};

ReferenceAlignment match_references(std::span<const std::string> sentences, std::span<const MatchChunk> chunks,
                                    const Scorer& scorer, const MatchOptions& options, std::string qid = {});

ReferenceAlignment match_references(const GeneratedAnswer& answer, const RankedList& chunks,
                                    const ChunkStore& store, const Scorer& scorer, const MatchOptions& options,
                                    TextVersion version = TextVersion::ver1);

/// Re-flags `referenced` under a new threshold; segmentation is unchanged.
ReferenceAlignment apply_threshold(ReferenceAlignment alignment, double threshold);

/// Throws std::logic_error unless segments are disjoint, ordered, non-empty
/// and cover 1..n exactly.
void check_partition(std::span<const Segment> segments, std::size_t n);
void check_partition(std::span<const SegmentChoice> choices, std::size_t n);

/// Number of partition checks performed by this process; lets test suites
/// report how many alignments they validated.
std::size_t partition_checks_performed();

namespace oracle {

/// Brute-force verifier sharing no code with the matcher. Spans are 1-based,
/// chunks 0-based, as in SegmentScoreMatrix.
using SpanScore = std::function<double(std::size_t i, std::size_t j, std::size_t t)>;

constexpr std::size_t kMaxSentences = 12;

/// Exhaustive selection over an arbitrary score function. Throws UsageError
/// when n exceeds kMaxSentences.
std::vector<SegmentChoice> select(const SpanScore& score, std::size_t n, std::size_t k, MatchMode mode);

/// Scores spans itself (calling `scorer` directly) and selects exhaustively.
std::vector<SegmentChoice> oracle_match(std::span<const std::string> sentences, std::span<const MatchChunk> chunks,
                                        const Scorer& scorer, MatchMode mode);

}  // namespace oracle

}  // namespace refrag
