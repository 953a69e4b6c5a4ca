// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/config.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "refrag/error.hpp"
#include "refrag/text.hpp"

namespace refrag {

namespace {

constexpr std::array<std::string_view, 25> kKeys{
    "listen",      "corpus",        "qa",          "scorer",        "retrieval_endpoint",
    "rerank_endpoint", "sep_token", "generator",   "generator_endpoint", "instruction",
    "max_tokens",  "sentence_budget", "version",   "n",             "k",
    "threshold",   "tie_epsilon",   "mode",        "seed",          "timeout_ms",
    "retries",     "backoff_ms",    "batch_size",  "max_in_flight", "cors_origin",
};

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw UsageError("config '" + std::string(key) + "': expected an integer, got '" + std::string(value) + "'");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
        throw UsageError("config '" + std::string(key) + "': expected a finite number, got '" + std::string(value) +
                         "'");
    }
    return out;
}

std::string unquote(std::string s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

}  // namespace

double Config::effective_threshold() const { return threshold.value_or(scorer == "remote" ? 0.5 : 0.0); }

void Config::set(std::string_view key, std::string_view value) {
    const std::string v(value);
    if (key == "listen") {
        listen = v;
    } else if (key == "corpus") {
        corpus = v;
    } else if (key == "qa") {
        qa = v;
    } else if (key == "scorer") {
        if (v != "lexical" && v != "remote") throw UsageError("config 'scorer' must be lexical or remote");
        scorer = v;
    } else if (key == "retrieval_endpoint") {
        retrieval_endpoint = v;
    } else if (key == "rerank_endpoint") {
        rerank_endpoint = v;
    } else if (key == "sep_token") {
        sep_token = v;
    } else if (key == "generator") {
        if (v != "extractive" && v != "remote") throw UsageError("config 'generator' must be extractive or remote");
        generator = v;
    } else if (key == "generator_endpoint") {
        generator_endpoint = v;
    } else if (key == "instruction") {
        instruction = v;
    } else if (key == "max_tokens") {
        max_tokens = parse_integer<int>(key, v);
    } else if (key == "sentence_budget") {
        sentence_budget = parse_integer<std::size_t>(key, v);
    } else if (key == "version") {
        auto parsed = parse_text_version(v);
        if (!parsed) throw UsageError("config 'version' must be ver0 or ver1");
        version = *parsed;
    } else if (key == "n") {
        n = parse_integer<std::size_t>(key, v);
    } else if (key == "k") {
        k = parse_integer<std::size_t>(key, v);
    } else if (key == "threshold") {
        threshold = parse_real(key, v);
    } else if (key == "tie_epsilon") {
        tie_epsilon = parse_real(key, v);
        if (tie_epsilon < 0.0) throw UsageError("config 'tie_epsilon' must be >= 0");
    } else if (key == "mode") {
        auto parsed = parse_match_mode(v);
        if (!parsed) throw UsageError("config 'mode' must be paper-literal or global-sum");
        mode = *parsed;
    } else if (key == "seed") {
        seed = parse_integer<std::uint64_t>(key, v);
    } else if (key == "timeout_ms") {
        remote.timeout = std::chrono::milliseconds(parse_integer<long>(key, v));
    } else if (key == "retries") {
        remote.retries = parse_integer<int>(key, v);
    } else if (key == "backoff_ms") {
        remote.backoff = std::chrono::milliseconds(parse_integer<long>(key, v));
    } else if (key == "batch_size") {
        remote.batch_size = parse_integer<std::size_t>(key, v);
    } else if (key == "max_in_flight") {
        remote.max_in_flight = parse_integer<std::size_t>(key, v);
    } else if (key == "cors_origin") {
        cors_origin = v;
    } else if (key == "max_match_cells") {
        max_match_cells = parse_integer<std::size_t>(key, v);
    } else {
        throw UsageError("unknown config key '" + std::string(key) + "'");
    }
}

void Config::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#' || trimmed.front() == '[') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path.filename().string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        try {
            const auto key = text::trim(trimmed.substr(0, eq));
            std::string value = unquote(text::trim(trimmed.substr(eq + 1)));
            // Data paths in a config file are relative to the file itself.
            if ((key == "corpus" || key == "qa") && !value.empty() && std::filesystem::path(value).is_relative()) {
                value = (path.parent_path() / value).lexically_normal().string();
            }
            set(key, value);
        } catch (const UsageError& e) {
            throw UsageError(path.filename().string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

void Config::apply_env() {
    auto apply = [&](std::string_view key) {
        std::string name = "REFRAG_";
        for (char c : key) name.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        if (const char* v = std::getenv(name.c_str())) set(key, v);
    };
    for (auto key : kKeys) apply(key);
    apply("max_match_cells");
}

void Config::apply_json(const nlohmann::json& overrides) {
    if (overrides.is_null()) return;
    if (!overrides.is_object()) throw UsageError("config overrides must be a JSON object");
    for (const auto& [key, v] : overrides.items()) {
        if (v.is_null()) continue;
        if (v.is_string()) {
            set(key, v.get<std::string>());
        } else if (v.is_boolean() || v.is_number()) {
            set(key, v.dump());
        } else {
            throw UsageError("config override '" + key + "' must be a scalar");
        }
    }
}

void Config::validate() const {
    if (k < 1) throw UsageError("k must be >= 1");
    if (n < k) throw UsageError("n (" + std::to_string(n) + ") must be >= k (" + std::to_string(k) + ")");
    if (!std::isfinite(effective_threshold())) throw UsageError("threshold must be finite");
    if (sentence_budget < 1) throw UsageError("sentence_budget must be >= 1");
    if (scorer == "remote" && (retrieval_endpoint.empty() || rerank_endpoint.empty())) {
        throw UsageError("scorer = remote needs retrieval_endpoint and rerank_endpoint");
    }
    if (generator == "remote" && generator_endpoint.empty()) {
        throw UsageError("generator = remote needs generator_endpoint");
    }
}

nlohmann::json Config::summary() const {
    return {{"scorer", scorer},
            {"generator", generator},
            {"version", std::string(to_string(version))},
            {"n", n},
            {"k", k},
            {"threshold", effective_threshold()},
            {"tie_epsilon", tie_epsilon},
            {"mode", std::string(to_string(mode))}};
}

Config load_config(const std::filesystem::path& file, const nlohmann::json& overrides) {
    Config cfg;
    if (!file.empty()) cfg.load_file(file);
    cfg.apply_env();
    cfg.apply_json(overrides);
    cfg.validate();
    return cfg;
}

}  // namespace refrag
