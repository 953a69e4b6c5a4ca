// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/scoring.hpp"

#include <algorithm>
#include <set>

#include "refrag/error.hpp"
#include "refrag/json_io.hpp"
#include "refrag/text.hpp"

namespace refrag {

std::vector<double> Scorer::score_batch(std::span<const TextPair> pairs) const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        try {
            out.push_back(score(pairs[i].query, pairs[i].doc));
        } catch (const ScoringError&) {
            throw;
        } catch (const BackendError& e) {
            throw ScoringError(e.kind(), i, e.what(), e.backend());
        } catch (const Error& e) {
            throw ScoringError(e.kind(), i, e.what());
        }
    }
    return out;
}

double lexical_score(std::string_view query, std::string_view doc) {
    const auto q = text::token_set(query);
    if (q.empty()) throw UsageError("lexical scorer: query has no tokens");
    const auto d = text::token_set(doc);
    if (d.empty()) throw UsageError("lexical scorer: document has no tokens");

    std::size_t common = 0;
    auto qi = q.begin();
    auto di = d.begin();
    while (qi != q.end() && di != d.end()) {
        if (*qi < *di) {
            ++qi;
        } else if (*di < *qi) {
            ++di;
        } else {
            ++common;
            ++qi;
            ++di;
        }
    }
    const std::size_t total = q.size() + d.size() - common;
    return static_cast<double>(common) / static_cast<double>(total);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    // Reject the low (2^64 mod bound) values so the modulo is unbiased.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % bound;
    }
}

std::vector<TrainingPair> export_training_pairs(std::span<const QAPair> pairs, const ChunkStore& store,
                                                const Scorer& scorer, std::uint64_t seed,
                                                TextVersion version) {
    std::mt19937_64 rng(seed);
    std::vector<TrainingPair> out;

    for (const auto& qa : pairs) {
        if (qa.split != Split::train) continue;
        if (qa.gold_chunk_ids.empty()) {
            throw DataError("qid \"" + qa.qid + "\" has no gold chunk");
        }
        const std::set<std::string> gold(qa.gold_chunk_ids.begin(), qa.gold_chunk_ids.end());

        std::vector<const Chunk*> pool;
        std::vector<TextPair> batch;
        for (const auto& c : store) {
            if (c.split != Split::train || gold.contains(c.id)) continue;
            pool.push_back(&c);
            batch.push_back({qa.question, render_chunk_text(c, version)});
        }
        if (pool.size() < kNegativesPerPositive) {
            throw DataError("qid \"" + qa.qid + "\" has only " + std::to_string(pool.size()) +
                            " non-gold train chunks; need " + std::to_string(kNegativesPerPositive));
        }
        const auto scores = scorer.score_batch(batch);

        std::vector<std::size_t> order(pool.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        // pool is already in ascending id order, so a stable sort keeps id tie-breaks.
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
        order.resize(std::min(order.size(), kNegativePoolSize));

        for (const auto& gold_id : qa.gold_chunk_ids) {
            const Chunk& positive = store.at(gold_id);
            out.push_back({qa.qid, qa.question, positive.id, render_chunk_text(positive, version), 1});

            // Partial Fisher-Yates over a copy of the top-10.
            auto candidates = order;
            for (std::size_t i = 0; i < kNegativesPerPositive; ++i) {
                const auto j = i + uniform_below(rng, candidates.size() - i);
                std::swap(candidates[i], candidates[j]);
                const Chunk& neg = *pool[candidates[i]];
                out.push_back({qa.qid, qa.question, neg.id, batch[candidates[i]].doc, 0});
            }
        }
    }
    return out;
}

std::string to_jsonl(std::span<const TrainingPair> pairs) {
    std::string out;
    for (const auto& p : pairs) {
        json rec{{"qid", p.qid},
                 {"question", p.question},
                 {"chunk_id", p.chunk_id},
                 {"chunk_text", p.chunk_text},
                 {"label", p.label}};
        out += rec.dump();
        out += '\n';
    }
    return out;
}

}  // namespace refrag
