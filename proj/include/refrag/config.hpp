// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "refrag/corpus.hpp"
#include "refrag/refmatch.hpp"
#include "refrag/remote.hpp"

namespace refrag {

/// Engine and service settings.
///
/// Sources, later ones winning: built-in defaults, a `key = value` file
/// (TOML-style; `#` comments, optional quotes, `[section]` lines ignored),
/// `REFRAG_<KEY>` environment variables, then explicit overrides.
struct Config {
    std::string listen = "127.0.0.1:8080";
    std::string corpus;
    std::string qa;

    std::string scorer = "lexical";  // lexical | remote
    std::string retrieval_endpoint;  // embed mode
    std::string rerank_endpoint;     // pairwise mode
    std::string sep_token = "[SEP]";

    std::string generator = "extractive";  // extractive | remote
    std::string generator_endpoint;
    std::string instruction = "Answer the question using only the numbered documents below.";
    int max_tokens = 1024;
    std::size_t sentence_budget = 1;

    TextVersion version = TextVersion::ver1;
    std::size_t n = 10;
    std::size_t k = 5;
    std::optional<double> threshold;  // unset: 0 for lexical, 0.5 for remote
    double tie_epsilon = 0.0;
    MatchMode mode = MatchMode::paper_literal;
    std::uint64_t seed = 0;

    RemoteOptions remote;
    std::string cors_origin = "*";
    std::size_t max_match_cells = 4096;  // sentences * chunks accepted by /v1/match

    double effective_threshold() const;

    /// Sets one key; throws UsageError for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    void load_file(const std::filesystem::path& path);
    void apply_env();
    /// Object of key -> string/number/bool.
    void apply_json(const nlohmann::json& overrides);
    /// Checks cross-field invariants (n >= k >= 1, endpoints for remote backends).
    void validate() const;

    nlohmann::json summary() const;
};

/// Defaults, then file (if non-empty), then environment, then overrides.
Config load_config(const std::filesystem::path& file, const nlohmann::json& overrides);

}  // namespace refrag
