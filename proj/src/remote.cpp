// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/remote.hpp"

#include <httplib.h>

#include <regex>
#include <thread>

#include "refrag/error.hpp"

namespace refrag {

using nlohmann::json;

Endpoint Endpoint::parse(std::string_view url) {
    static const std::regex re(R"(^(http)://([^/\s]+)(/\S*)?$)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(url.begin(), url.end(), m, re)) {
        throw UsageError("invalid endpoint URL '" + std::string(url) + "' (expected http://host[:port]/path)");
    }
    Endpoint ep;
    ep.base = m[1].str() + "://" + m[2].str();
    ep.path = m[3].matched ? m[3].str() : "/";
    return ep;
}

json post_json(const Endpoint& endpoint, const json& body, const RemoteOptions& opts,
               const std::string& backend, int& retries_used, const LogSink& log) {
    const auto payload = body.dump();
    const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(opts.timeout).count();
    const auto timeout_us =
        std::chrono::duration_cast<std::chrono::microseconds>(opts.timeout).count() % 1000000;

    retries_used = 0;
    std::string last_failure;
    for (int attempt = 0; attempt <= opts.retries; ++attempt) {
        if (attempt > 0) {
            ++retries_used;
            if (log) {
                log(backend + ": retry " + std::to_string(attempt) + "/" + std::to_string(opts.retries) +
                    " after " + last_failure);
            }
            if (opts.backoff.count() > 0) std::this_thread::sleep_for(opts.backoff * attempt);
        }
        httplib::Client client(endpoint.base);
        client.set_connection_timeout(timeout_s, timeout_us);
        client.set_read_timeout(timeout_s, timeout_us);
        client.set_write_timeout(timeout_s, timeout_us);
        auto res = client.Post(endpoint.path, payload, "application/json");
        if (!res) {
            last_failure = "connection error (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            last_failure = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw BackendError(backend, backend + " at " + endpoint.url() + " returned HTTP " +
                                            std::to_string(res->status));
        }
        try {
            return json::parse(res->body);
        } catch (const json::parse_error&) {
            throw ProtocolError(backend, backend + " at " + endpoint.url() + " returned malformed JSON");
        }
    }
    throw BackendError(backend, backend + " at " + endpoint.url() + " failed after " +
                                    std::to_string(opts.retries + 1) + " attempts: " + last_failure);
}

RemoteScorer::RemoteScorer(Endpoint endpoint, RemoteMode mode, std::string sep_token, RemoteOptions opts,
                           std::string label, LogSink log)
    : endpoint_(std::move(endpoint)),
      mode_(mode),
      sep_token_(std::move(sep_token)),
      opts_(opts),
      label_(std::move(label)),
      log_(std::move(log)),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(opts.max_in_flight, 1, 1024))) {
    if (opts_.batch_size < 1) throw UsageError("remote scorer: batch_size must be >= 1");
    if (opts_.retries < 0) throw UsageError("remote scorer: retries must be >= 0");
}

double RemoteScorer::score(std::string_view query, std::string_view doc) const {
    const TextPair pair{std::string(query), std::string(doc)};
    return remote_score_batch(std::span(&pair, 1)).scores.front();
}

std::vector<double> RemoteScorer::score_batch(std::span<const TextPair> pairs) const {
    return remote_score_batch(pairs).scores;
}

BatchScores RemoteScorer::remote_score_batch(std::span<const TextPair> pairs) const {
    BatchScores out;
    out.scores.reserve(pairs.size());
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < pairs.size(); start += opts_.batch_size, ++batch_index) {
        const auto len = std::min(opts_.batch_size, pairs.size() - start);
        int retries = 0;
        try {
            auto scores = score_one_batch(pairs.subspan(start, len), batch_index, retries);
            out.scores.insert(out.scores.end(), scores.begin(), scores.end());
        } catch (const BackendError& e) {
            throw ScoringError(ErrorKind::backend, start,
                               std::string(e.what()) + " (batch " + std::to_string(batch_index) + ")", e.backend());
        }
        out.retries += retries;
    }
    return out;
}

std::vector<double> RemoteScorer::score_one_batch(std::span<const TextPair> pairs, std::size_t batch_index,
                                                  int& retries) const {
    json inputs = json::array();
    if (mode_ == RemoteMode::pairwise) {
        for (const auto& p : pairs) inputs.push_back(p.query + " " + sep_token_ + " " + p.doc);
    } else {
        for (const auto& p : pairs) {
            inputs.push_back(p.query);
            inputs.push_back(p.doc);
        }
    }
    const json body{{"mode", mode_ == RemoteMode::pairwise ? "pairwise" : "embed"}, {"inputs", inputs}};

    in_flight_.acquire();
    json res;
    try {
        res = post_json(endpoint_, body, opts_, label_, retries, log_);
    } catch (...) {
        in_flight_.release();
        throw;
    }
    in_flight_.release();

    const auto where = label_ + " at " + endpoint_.url() + " (batch " + std::to_string(batch_index) + ")";
    std::vector<double> scores;
    if (mode_ == RemoteMode::pairwise) {
        auto it = res.find("scores");
        if (it == res.end() || !it->is_array() || it->size() != pairs.size()) {
            throw ProtocolError(label_, where + ": expected 'scores' array of length " +
                                            std::to_string(pairs.size()));
        }
        for (const auto& v : *it) {
            if (!v.is_number()) throw ProtocolError(label_, where + ": non-numeric score");
            scores.push_back(v.get<double>());
        }
        return scores;
    }

    auto it = res.find("vectors");
    if (it == res.end() || !it->is_array() || it->size() != 2 * pairs.size()) {
        throw ProtocolError(label_, where + ": expected 'vectors' array of length " +
                                        std::to_string(2 * pairs.size()));
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& q = (*it)[2 * i];
        const auto& d = (*it)[2 * i + 1];
        if (!q.is_array() || !d.is_array() || q.size() != d.size() || q.empty()) {
            throw ProtocolError(label_, where + ": mismatched embedding vectors");
        }
        double dot = 0.0;
        for (std::size_t x = 0; x < q.size(); ++x) {
            if (!q[x].is_number() || !d[x].is_number()) {
                throw ProtocolError(label_, where + ": non-numeric embedding component");
            }
            dot += q[x].get<double>() * d[x].get<double>();
        }
        scores.push_back(dot);
    }
    return scores;
}

RemoteGenerator::RemoteGenerator(Endpoint endpoint, std::string instruction, int max_tokens, RemoteOptions opts,
                                 text::SentenceSplitter splitter, LogSink log)
    : endpoint_(std::move(endpoint)),
      instruction_(std::move(instruction)),
      max_tokens_(max_tokens),
      opts_(opts),
      splitter_(std::move(splitter)),
      log_(std::move(log)) {}

std::vector<std::string> RemoteGenerator::generate(std::string_view question,
                                                   std::span<const ContextChunk> context) const {
    const json body{{"prompt", build_prompt(instruction_, question, context)}, {"max_tokens", max_tokens_}};
    int retries = 0;
    const std::string backend = "generator";
    auto res = post_json(endpoint_, body, opts_, backend, retries, log_);
    auto it = res.find("text");
    if (it == res.end() || !it->is_string()) {
        throw ProtocolError(backend, "generator at " + endpoint_.url() + ": response lacks 'text'");
    }
    auto sentences = splitter_(it->get<std::string>());
    if (sentences.empty()) {
        throw BackendError(backend, "generator at " + endpoint_.url() + " returned an empty answer");
    }
    return sentences;
}

}  // namespace refrag
