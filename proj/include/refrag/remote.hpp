// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include <json.hpp>

#include "refrag/pipeline.hpp"
#include "refrag/scoring.hpp"
#include "refrag/text.hpp"

namespace refrag {

/// http://host[:port]/path
struct Endpoint {
    std::string base;  // scheme://host:port
    std::string path;  // starts with '/'

    static Endpoint parse(std::string_view url);
    std::string url() const { return base + path; }
};

struct RemoteOptions {
    std::chrono::milliseconds timeout{30000};
    int retries = 2;  // extra attempts after the first
    std::chrono::milliseconds backoff{200};
    std::size_t batch_size = 32;
    std::size_t max_in_flight = 4;
};

using LogSink = std::function<void(const std::string&)>;

/// POSTs `body` to `endpoint`, retrying connection failures and 5xx/429
/// responses. Returns the parsed JSON response. `retries_used` receives the
/// number of retries performed.
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body, const RemoteOptions& opts,
                         const std::string& backend, int& retries_used, const LogSink& log = {});

enum class RemoteMode { embed_similarity, pairwise };

struct BatchScores {
    std::vector<double> scores;
    int retries = 0;
};

/// Client for a model server speaking
/// `{"mode": "pairwise"|"embed", "inputs": [...]}` -> `{"scores"|"vectors": [...]}`.
class RemoteScorer final : public Scorer {
public:
    RemoteScorer(Endpoint endpoint, RemoteMode mode, std::string sep_token, RemoteOptions opts,
                 std::string label, LogSink log = {});

    double score(std::string_view query, std::string_view doc) const override;
    std::vector<double> score_batch(std::span<const TextPair> pairs) const override;
    std::string identity() const override { return label_; }

    /// Scores in batches of `batch_size`; an empty input makes no request.
    BatchScores remote_score_batch(std::span<const TextPair> pairs) const;

    const Endpoint& endpoint() const { return endpoint_; }
    RemoteMode mode() const { return mode_; }

private:
    std::vector<double> score_one_batch(std::span<const TextPair> pairs, std::size_t batch_index,
                                        int& retries) const;

    Endpoint endpoint_;
    RemoteMode mode_;
    std::string sep_token_;
    RemoteOptions opts_;
    std::string label_;
    LogSink log_;
    mutable std::counting_semaphore<1024> in_flight_;
};

/// Chat endpoint speaking `{"prompt": str, "max_tokens": int}` -> `{"text": str}`.
class RemoteGenerator final : public Generator {
public:
    RemoteGenerator(Endpoint endpoint, std::string instruction, int max_tokens, RemoteOptions opts,
                    text::SentenceSplitter splitter = text::split_sentences, LogSink log = {});

    std::vector<std::string> generate(std::string_view question,
                                      std::span<const ContextChunk> context) const override;
    std::string identity() const override { return "remote:" + endpoint_.url(); }

private:
    Endpoint endpoint_;
    std::string instruction_;
    int max_tokens_;
    RemoteOptions opts_;
    text::SentenceSplitter splitter_;
    LogSink log_;
};

}  // namespace refrag
