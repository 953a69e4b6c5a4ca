// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refrag/corpus.hpp"
#include "refrag/scoring.hpp"
#include "refrag/text.hpp"

namespace refrag {

enum class Stage { retrieval, reranking };
std::string_view to_string(Stage s);

struct ScoredChunk {
    std::string chunk_id;
    double score = 0.0;

    bool operator==(const ScoredChunk&) const = default;
};

/// Chunks ordered by descending score, ties by ascending id.
struct RankedList {
    std::string qid;
    Stage stage = Stage::retrieval;
    std::vector<ScoredChunk> entries;

    std::vector<std::string> ids() const;
};

struct GeneratedAnswer {
    std::string qid;
    std::vector<std::string> sentences;
    std::string generator;
};

/// What a generator sees for one context chunk.
struct ContextChunk {
    std::string id;
    std::string text;  // ver1 rendering
    std::string body;
};

class Generator {
public:
    virtual ~Generator() = default;
    /// Returns the answer already split into sentences.
    virtual std::vector<std::string> generate(std::string_view question,
                                              std::span<const ContextChunk> context) const = 0;
    virtual std::string identity() const = 0;
};

/// Offline generator: for each context chunk, in order, emits the
/// `sentences_per_chunk` body sentences scoring highest against the question
/// under the lexical scorer (kept in body order; earlier sentence wins ties).
/// Markdown heading lines are skipped.
class ExtractiveGenerator final : public Generator {
public:
    explicit ExtractiveGenerator(std::size_t sentences_per_chunk = 1,
                                 text::SentenceSplitter splitter = text::split_sentences);
    std::vector<std::string> generate(std::string_view question,
                                      std::span<const ContextChunk> context) const override;
    std::string identity() const override { return "extractive"; }

private:
    std::size_t budget_;
    text::SentenceSplitter splitter_;
};

/// Prompt sent to chat-style generators:
/// `<instruction>\n\n[1]\n<text 1>\n\n[2]\n<text 2>...\n\nQuestion: <q>`.
std::string build_prompt(std::string_view instruction, std::string_view question,
                         std::span<const ContextChunk> context);

/// Exhaustive top-n retrieval over every chunk in the store.
RankedList retrieve(std::string_view query, const ChunkStore& store, const Scorer& scorer,
                    TextVersion version, std::size_t n, std::string qid = {});

/// Re-scores retrieval-stage candidates and keeps the top k.
RankedList rerank(std::string_view query, const RankedList& candidates, const ChunkStore& store,
                  const Scorer& scorer, TextVersion version, std::size_t k);

GeneratedAnswer generate(std::string_view query, const RankedList& context, const ChunkStore& store,
                         const Generator& generator);

/// Sorts entries by descending score, ties by ascending chunk id.
void sort_ranked(std::vector<ScoredChunk>& entries);

}  // namespace refrag
