// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/pipeline.hpp"

#include <algorithm>

#include "refrag/error.hpp"

namespace refrag {

std::string_view to_string(Stage s) { return s == Stage::retrieval ? "retrieval" : "reranking"; }

std::vector<std::string> RankedList::ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.chunk_id);
    return out;
}

void sort_ranked(std::vector<ScoredChunk>& entries) {
    std::sort(entries.begin(), entries.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
}

namespace {

std::vector<ScoredChunk> score_chunks(std::string_view query, const std::vector<const Chunk*>& chunks,
                                      const Scorer& scorer, TextVersion version) {
    std::vector<TextPair> pairs;
    pairs.reserve(chunks.size());
    for (const auto* c : chunks) pairs.push_back({std::string(query), render_chunk_text(*c, version)});

    std::vector<double> scores;
    try {
        scores = scorer.score_batch(pairs);
    } catch (const ScoringError& e) {
        const auto idx = std::min(e.pair_index(), chunks.size() - 1);
        e.rethrow_with("scoring chunk \"" + chunks[idx]->id + "\"");
    }
    std::vector<ScoredChunk> out;
    out.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) out.push_back({chunks[i]->id, scores[i]});
    return out;
}

// Markdown heading lines are titles, not answer material.
std::string without_headings(std::string_view body) {
    std::string out;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const auto nl = body.find('\n', pos);
        const auto line = body.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (text::trim(line).rfind('#', 0) != 0) {
            out.append(line);
            out.push_back('\n');
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

}  // namespace

RankedList retrieve(std::string_view query, const ChunkStore& store, const Scorer& scorer,
                    TextVersion version, std::size_t n, std::string qid) {
    if (n < 1) throw UsageError("retrieve: n must be >= 1");
    if (store.empty()) throw DataError("retrieve: chunk store is empty");

    std::vector<const Chunk*> chunks;
    chunks.reserve(store.size());
    for (const auto& c : store) chunks.push_back(&c);

    RankedList out{std::move(qid), Stage::retrieval, score_chunks(query, chunks, scorer, version)};
    sort_ranked(out.entries);
    if (out.entries.size() > n) out.entries.resize(n);
    return out;
}

RankedList rerank(std::string_view query, const RankedList& candidates, const ChunkStore& store,
                  const Scorer& scorer, TextVersion version, std::size_t k) {
    if (candidates.stage != Stage::retrieval) {
        throw UsageError("rerank: candidates must come from the retrieval stage");
    }
    if (k < 1) throw UsageError("rerank: k must be >= 1");
    if (k > candidates.entries.size()) {
        throw UsageError("rerank: k=" + std::to_string(k) + " exceeds candidate count " +
                         std::to_string(candidates.entries.size()));
    }
    std::vector<const Chunk*> chunks;
    chunks.reserve(candidates.entries.size());
    for (const auto& e : candidates.entries) chunks.push_back(&store.at(e.chunk_id));

    RankedList out{candidates.qid, Stage::reranking, score_chunks(query, chunks, scorer, version)};
    sort_ranked(out.entries);
    out.entries.resize(k);
    return out;
}

GeneratedAnswer generate(std::string_view query, const RankedList& context, const ChunkStore& store,
                         const Generator& generator) {
    if (context.entries.empty()) throw UsageError("generate: context is empty");
    std::vector<ContextChunk> chunks;
    chunks.reserve(context.entries.size());
    for (const auto& e : context.entries) {
        const Chunk& c = store.at(e.chunk_id);
        chunks.push_back({c.id, render_chunk_text(c, TextVersion::ver1), c.body});
    }
    GeneratedAnswer answer{context.qid, generator.generate(query, chunks), generator.identity()};
    std::erase_if(answer.sentences, [](const std::string& s) { return text::trim(s).empty(); });
    if (answer.sentences.empty()) {
        throw DataError("generator '" + answer.generator + "' produced an empty answer");
    }
    return answer;
}

ExtractiveGenerator::ExtractiveGenerator(std::size_t sentences_per_chunk, text::SentenceSplitter splitter)
    : budget_(sentences_per_chunk), splitter_(std::move(splitter)) {
    if (budget_ < 1) throw UsageError("extractive generator: sentence budget must be >= 1");
}

std::vector<std::string> ExtractiveGenerator::generate(std::string_view question,
                                                       std::span<const ContextChunk> context) const {
    if (text::token_set(question).empty()) throw UsageError("extractive generator: question has no tokens");
    std::vector<std::string> out;
    for (const auto& chunk : context) {
        const auto sentences = splitter_(without_headings(chunk.body));
        struct Candidate {
            std::size_t index;
            double score;
        };
        std::vector<Candidate> candidates;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            if (text::token_set(sentences[i]).empty()) continue;
            candidates.push_back({i, lexical_score(question, sentences[i])});
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
        if (candidates.size() > budget_) candidates.resize(budget_);
        std::sort(candidates.begin(), candidates.end(),
                  [](const Candidate& a, const Candidate& b) { return a.index < b.index; });
        for (const auto& c : candidates) out.push_back(sentences[c.index]);
    }
    return out;
}

std::string build_prompt(std::string_view instruction, std::string_view question,
                         std::span<const ContextChunk> context) {
    std::string prompt(instruction);
    for (std::size_t i = 0; i < context.size(); ++i) {
        prompt += "\n\n[" + std::to_string(i + 1) + "]\n";
        prompt += context[i].text;
    }
    prompt += "\n\nQuestion: ";
    prompt += question;
    return prompt;
}

}  // namespace refrag
