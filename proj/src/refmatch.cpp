// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/refmatch.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "refrag/error.hpp"
#include "refrag/text.hpp"

namespace refrag {

namespace {

std::atomic<std::size_t> g_partition_checks{0};

struct SpanCell {
    std::size_t i;
    std::size_t j;
    std::size_t t;
};

}  // namespace

std::string_view to_string(MatchMode m) { return m == MatchMode::paper_literal ? "paper_literal" : "global_sum"; }

std::optional<MatchMode> parse_match_mode(std::string_view s) {
    if (s == "paper_literal" || s == "paper-literal") return MatchMode::paper_literal;
    if (s == "global_sum" || s == "global-sum") return MatchMode::global_sum;
    return std::nullopt;
}

SegmentScoreMatrix::SegmentScoreMatrix(std::size_t n, std::vector<std::string> chunk_ids)
    : n_(n), chunk_ids_(std::move(chunk_ids)), scores_(n * (n + 1) / 2 * chunk_ids_.size(), 0.0) {}

std::size_t SegmentScoreMatrix::index(std::size_t i, std::size_t j, std::size_t t) const {
    // Spans are laid out by start, then end: (1,1) (1,2) .. (1,n) (2,2) ..
    const std::size_t before = (i - 1) * n_ - (i - 1) * (i - 2) / 2;
    return (before + (j - i)) * chunk_ids_.size() + t;
}

SegmentScoreMatrix build_matrix(std::span<const std::string> sentences, std::span<const MatchChunk> chunks,
                                const Scorer& scorer) {
    const std::size_t n = sentences.size();
    const std::size_t k = chunks.size();
    if (n < 1) throw UsageError("reference matching needs at least one sentence");
    if (k < 1) throw UsageError("reference matching needs at least one chunk");

    std::vector<std::string> ids;
    ids.reserve(k);
    for (const auto& c : chunks) ids.push_back(c.id);
    SegmentScoreMatrix matrix(n, std::move(ids));

    std::vector<SpanCell> cells;
    std::vector<TextPair> pairs;
    cells.reserve(matrix.size());
    pairs.reserve(matrix.size());
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = i; j <= n; ++j) {
            const auto span_text = text::join_range(sentences, i - 1, j - 1);
            for (std::size_t t = 0; t < k; ++t) {
                cells.push_back({i, j, t});
                pairs.push_back({span_text, chunks[t].text});
            }
        }
    }

    auto describe = [&](const SpanCell& c) {
        return "span (" + std::to_string(c.i) + "," + std::to_string(c.j) + ") vs chunk " +
               std::to_string(c.t + 1) + " \"" + chunks[c.t].id + "\"";
    };

    std::vector<double> scores;
    try {
        scores = scorer.score_batch(pairs);
    } catch (const ScoringError& e) {
        const auto& c = cells[std::min(e.pair_index(), cells.size() - 1)];
        e.rethrow_with("scoring " + describe(c));
    }
    if (scores.size() != cells.size()) {
        throw Error(ErrorKind::backend, "scorer '" + scorer.identity() + "' returned " +
                                            std::to_string(scores.size()) + " scores for " +
                                            std::to_string(cells.size()) + " pairs");
    }
    for (std::size_t x = 0; x < cells.size(); ++x) {
        if (!std::isfinite(scores[x])) {
            throw DataError("non-finite score for " + describe(cells[x]));
        }
        matrix.set(cells[x].i, cells[x].j, cells[x].t, scores[x]);
    }
    return matrix;
}

SegmentScoreMatrix build_matrix(const GeneratedAnswer& answer, const RankedList& chunks, const ChunkStore& store,
                                const Scorer& scorer, TextVersion version) {
    std::vector<MatchChunk> match_chunks;
    match_chunks.reserve(chunks.entries.size());
    for (const auto& e : chunks.entries) {
        match_chunks.push_back({e.chunk_id, render_chunk_text(store.at(e.chunk_id), version)});
    }
    return build_matrix(answer.sentences, match_chunks, scorer);
}

std::vector<SegmentChoice> select_segments(const SegmentScoreMatrix& matrix, MatchMode mode) {
    const std::size_t n = matrix.sentence_count();
    const std::size_t k = matrix.chunk_count();

    // choice[j] is the winning (start, chunk) for end position j. Candidates
    // are visited in ascending (i, t) and only a strictly better value
    // replaces the incumbent, which realises the tie-break order.
    std::vector<SegmentChoice> choice(n + 1);
    std::vector<double> best(n + 1, 0.0);  // prefix optimum, global_sum only

    for (std::size_t j = 1; j <= n; ++j) {
        bool have = false;
        double incumbent = 0.0;
        for (std::size_t i = 1; i <= j; ++i) {
            const double base = mode == MatchMode::global_sum ? best[i - 1] : 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                const double value = base + matrix.at(i, j, t);
                if (!have || value > incumbent) {
                    have = true;
                    incumbent = value;
                    choice[j] = {i, j, t, matrix.at(i, j, t)};
                }
            }
        }
        best[j] = incumbent;
    }

    std::vector<SegmentChoice> out;
    for (std::size_t current = n; current > 0; current = choice[current].start - 1) {
        out.push_back(choice[current]);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<Segment> attach_segments(const SegmentScoreMatrix& matrix, std::span<const SegmentChoice> choices,
                                     double threshold, double tie_epsilon) {
    if (!(tie_epsilon >= 0.0)) throw UsageError("tie_epsilon must be >= 0");
    if (!std::isfinite(threshold)) throw UsageError("threshold must be finite");
    const auto& ids = matrix.chunk_ids();
    std::vector<Segment> out;
    out.reserve(choices.size());
    for (const auto& c : choices) {
        Segment seg{c.start, c.end, {ids[c.chunk]}, c.score, c.score >= threshold};
        // tie_epsilon == 0 keeps the single best chunk even under exact ties.
        if (tie_epsilon > 0.0) {
            for (std::size_t t = 0; t < ids.size(); ++t) {
                if (t != c.chunk && matrix.at(c.start, c.end, t) >= c.score - tie_epsilon) {
                    seg.chunk_ids.push_back(ids[t]);
                }
            }
        }
        out.push_back(std::move(seg));
    }
    return out;
}

ReferenceAlignment match_references(std::span<const std::string> sentences, std::span<const MatchChunk> chunks,
                                    const Scorer& scorer, const MatchOptions& options, std::string qid) {
    const auto matrix = build_matrix(sentences, chunks, scorer);
    const auto choices = select_segments(matrix, options.mode);
    check_partition(std::span<const SegmentChoice>(choices), sentences.size());
    ReferenceAlignment out{std::move(qid), attach_segments(matrix, choices, options.threshold, options.tie_epsilon),
                           options.threshold, options.mode};
    check_partition(out.segments, sentences.size());
    return out;
}

ReferenceAlignment match_references(const GeneratedAnswer& answer, const RankedList& chunks,
                                    const ChunkStore& store, const Scorer& scorer, const MatchOptions& options,
                                    TextVersion version) {
    std::vector<MatchChunk> match_chunks;
    match_chunks.reserve(chunks.entries.size());
    for (const auto& e : chunks.entries) {
        match_chunks.push_back({e.chunk_id, render_chunk_text(store.at(e.chunk_id), version)});
    }
    return match_references(answer.sentences, match_chunks, scorer, options, answer.qid);
}

ReferenceAlignment apply_threshold(ReferenceAlignment alignment, double threshold) {
    if (!std::isfinite(threshold)) throw UsageError("threshold must be finite");
    alignment.threshold = threshold;
    for (auto& s : alignment.segments) s.referenced = s.score >= threshold;
    check_partition(alignment.segments, alignment.sentence_count());
    return alignment;
}

namespace {

template <typename Seg>
void check_partition_impl(std::span<const Seg> segments, std::size_t n) {
    ++g_partition_checks;
    std::size_t expected_start = 1;
    for (const auto& s : segments) {
        if (s.start != expected_start || s.end < s.start || s.end > n) {
            throw std::logic_error("segment (" + std::to_string(s.start) + "," + std::to_string(s.end) +
                                   ") breaks the partition of 1.." + std::to_string(n));
        }
        expected_start = s.end + 1;
    }
    if (expected_start != n + 1) {
        throw std::logic_error("segments do not cover 1.." + std::to_string(n));
    }
}

}  // namespace

void check_partition(std::span<const Segment> segments, std::size_t n) { check_partition_impl(segments, n); }
void check_partition(std::span<const SegmentChoice> choices, std::size_t n) { check_partition_impl(choices, n); }

std::size_t partition_checks_performed() { return g_partition_checks.load(); }

}  // namespace refrag
