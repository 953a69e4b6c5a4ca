// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "refrag/scoring.hpp"

namespace refrag::testing {

inline std::string fixture(const std::string& name) { return std::string(REFRAG_FIXTURES) + "/" + name; }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Wraps a scorer and counts score() calls.
class CountingScorer final : public Scorer {
public:
    explicit CountingScorer(const Scorer& inner) : inner_(inner) {}
    double score(std::string_view q, std::string_view d) const override {
        ++calls_;
        return inner_.score(q, d);
    }
    std::string identity() const override { return "counting"; }
    std::size_t calls() const { return calls_; }

private:
    const Scorer& inner_;
    mutable std::atomic<std::size_t> calls_{0};
};

/// Scores from a fixed (doc -> score) table, ignoring the query.
class TableScorer final : public Scorer {
public:
    explicit TableScorer(std::map<std::string, double> table) : table_(std::move(table)) {}
    double score(std::string_view, std::string_view doc) const override { return table_.at(std::string(doc)); }
    std::string identity() const override { return "table"; }

private:
    std::map<std::string, double> table_;
};

}  // namespace refrag::testing
