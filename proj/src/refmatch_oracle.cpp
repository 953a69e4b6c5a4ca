// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

// Exhaustive reference-matching verifier. Deliberately shares nothing with
// refmatch.cpp: it keeps its own score table, its own span joining and its
// own tie-break comparator.

#include <map>
#include <tuple>

#include "refrag/error.hpp"
#include "refrag/refmatch.hpp"

namespace refrag::oracle {

namespace {

// (score desc, start asc, chunk asc) as a strict "is better" relation.
bool better_cell(double score_a, std::size_t i_a, std::size_t t_a, double score_b, std::size_t i_b,
                 std::size_t t_b) {
    if (score_a != score_b) return score_a > score_b;
    return std::tie(i_a, t_a) < std::tie(i_b, t_b);
}

std::vector<SegmentChoice> literal_by_rescan(const SpanScore& score, std::size_t n, std::size_t k) {
    std::vector<SegmentChoice> reversed;
    std::size_t end = n;
    while (end > 0) {
        SegmentChoice winner{1, end, 0, score(1, end, 0)};
        for (std::size_t i = 1; i <= end; ++i) {
            for (std::size_t t = 0; t < k; ++t) {
                const double s = score(i, end, t);
                if (better_cell(s, i, t, winner.score, winner.start, winner.chunk)) {
                    winner = {i, end, t, s};
                }
            }
        }
        reversed.push_back(winner);
        end = winner.start - 1;
    }
    return {reversed.rbegin(), reversed.rend()};
}

// Ordering key: segments from the last one backwards, each as (start, chunk).
bool key_less(const std::vector<SegmentChoice>& a, const std::vector<SegmentChoice>& b) {
    auto ia = a.rbegin();
    auto ib = b.rbegin();
    for (; ia != a.rend() && ib != b.rend(); ++ia, ++ib) {
        if (ia->start != ib->start) return ia->start < ib->start;
        if (ia->chunk != ib->chunk) return ia->chunk < ib->chunk;
    }
    return a.size() < b.size();
}

std::vector<SegmentChoice> sum_by_enumeration(const SpanScore& score, std::size_t n, std::size_t k) {
    std::vector<SegmentChoice> best_seq;
    double best_total = 0.0;
    bool have = false;

    const std::size_t cut_masks = std::size_t{1} << (n - 1);
    for (std::size_t mask = 0; mask < cut_masks; ++mask) {
        // Bit b set means a cut between sentence b+1 and b+2.
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        std::size_t start = 1;
        for (std::size_t b = 0; b + 1 < n; ++b) {
            if (mask & (std::size_t{1} << b)) {
                spans.emplace_back(start, b + 1);
                start = b + 2;
            }
        }
        spans.emplace_back(start, n);

        const std::size_t m = spans.size();
        std::vector<std::size_t> assign(m, 0);
        for (;;) {
            std::vector<SegmentChoice> seq;
            double total = 0.0;
            for (std::size_t s = 0; s < m; ++s) {
                const double v = score(spans[s].first, spans[s].second, assign[s]);
                total = total + v;
                seq.push_back({spans[s].first, spans[s].second, assign[s], v});
            }
            if (!have || total > best_total || (total == best_total && key_less(seq, best_seq))) {
                have = true;
                best_total = total;
                best_seq = std::move(seq);
            }
            // Mixed-radix increment over chunk assignments.
            std::size_t pos = 0;
            while (pos < m && ++assign[pos] == k) assign[pos++] = 0;
            if (pos == m) break;
        }
    }
    return best_seq;
}

}  // namespace

std::vector<SegmentChoice> select(const SpanScore& score, std::size_t n, std::size_t k, MatchMode mode) {
    if (n < 1 || k < 1) throw UsageError("oracle: need at least one sentence and one chunk");
    if (n > kMaxSentences) {
        throw UsageError("oracle: " + std::to_string(n) + " sentences exceeds the exhaustive bound of " +
                         std::to_string(kMaxSentences));
    }
    return mode == MatchMode::paper_literal ? literal_by_rescan(score, n, k) : sum_by_enumeration(score, n, k);
}

std::vector<SegmentChoice> oracle_match(std::span<const std::string> sentences, std::span<const MatchChunk> chunks,
                                        const Scorer& scorer, MatchMode mode) {
    const std::size_t n = sentences.size();
    if (n > kMaxSentences) {
        throw UsageError("oracle: " + std::to_string(n) + " sentences exceeds the exhaustive bound of " +
                         std::to_string(kMaxSentences));
    }
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> table;
    for (std::size_t i = 1; i <= n; ++i) {
        std::string joined;
        for (std::size_t j = i; j <= n; ++j) {
            if (j > i) joined += ' ';
            joined += sentences[j - 1];
            for (std::size_t t = 0; t < chunks.size(); ++t) {
                table[{i, j, t}] = scorer.score(joined, chunks[t].text);
            }
        }
    }
    return select([&](std::size_t i, std::size_t j, std::size_t t) { return table.at({i, j, t}); }, n,
                  chunks.size(), mode);
}

}  // namespace refrag::oracle
