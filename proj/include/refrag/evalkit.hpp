// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "refrag/refmatch.hpp"

namespace refrag::eval {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Ranking metrics
// ---------------------------------------------------------------------------

/// Sum of precision@r over the gold hits within the first k ids, divided by
/// min(|gold|, k). An empty ranking (retrieval failure) scores 0.
double average_precision_at_k(std::span<const std::string> ranked, const std::set<std::string>& gold,
                              std::size_t k);

/// 1 if any of the first k ids is gold, else 0.
int success_at_k(std::span<const std::string> ranked, const std::set<std::string>& gold, std::size_t k);

struct RunEntry {
    std::string qid;
    std::vector<std::string> ranked;
    bool failed = false;  // nothing survived retrieval; scored as 0
};

using GoldMap = std::map<std::string, std::set<std::string>>;

struct QueryBreakdown {
    std::string qid;
    std::map<std::string, double> values;
    bool failed = false;
};

struct EvalReport {
    std::map<std::string, double> aggregates;
    std::vector<QueryBreakdown> per_query;  // ascending qid
    json config = json::object();
    std::map<std::string, std::size_t> counts;
};

/// MAP@k and Success@k for every k in `ks` (keys "MAP@k", "Success@k").
EvalReport evaluate_run(std::span<const RunEntry> run, const GoldMap& gold, std::span<const std::size_t> ks);

std::vector<RunEntry> parse_run(std::istream& in, const std::string& origin);

// ---------------------------------------------------------------------------
// Sentence-level reference precision
// ---------------------------------------------------------------------------

struct ReferenceAnnotation {
    std::string qid;
    std::vector<std::string> sentences;
    std::vector<std::set<std::string>> sentence_refs;
};

std::vector<ReferenceAnnotation> parse_annotations(std::istream& in, const std::string& origin);

struct PrecisionResult {
    std::optional<double> precision;  // nullopt: no referenced sentence
    std::size_t matched = 0;
    std::size_t counted = 0;
};

/// Counts sentences inside referenced segments; a sentence matches when its
/// segment's primary chunk is in the annotated set.
PrecisionResult sentence_precision(const ReferenceAlignment& alignment, const ReferenceAnnotation& annotation);

struct AnnotatedAlignment {
    ReferenceAlignment alignment;
    ReferenceAnnotation annotation;
};

struct CurvePoint {
    double threshold = 0.0;
    std::optional<double> mean_precision;  // over answers with data
    double coverage = 0.0;                 // referenced sentences / all sentences
    std::size_t answers_with_data = 0;
    std::size_t answers_without_data = 0;
};

std::vector<CurvePoint> precision_threshold_curve(std::span<const AnnotatedAlignment> items,
                                                  std::span<const double> thresholds);

// ---------------------------------------------------------------------------
// Judge aggregation
// ---------------------------------------------------------------------------

enum class JudgeKind { single_score, pairwise_rank };

struct JudgeRecord {
    std::string qid;
    JudgeKind kind = JudgeKind::single_score;
    std::string model;                  // single_score only
    std::map<std::string, int> scores;  // metric -> 1..5
    std::map<std::string, int> ranks;   // model -> 1..M (pairwise_rank)
};

std::vector<JudgeRecord> parse_judge(std::istream& in, const std::string& origin);

struct ScoreSummary {
    double average = 0.0;
    std::array<std::size_t, 5> histogram{};  // counts of scores 1..5
    std::size_t count = 0;
};

/// model -> metric -> summary. An empty `metrics` list means every metric seen.
std::map<std::string, std::map<std::string, ScoreSummary>> aggregate_judge_scores(
    std::span<const JudgeRecord> records, std::span<const std::string> metrics = {});

/// Mean of a 1..5 histogram: sum(score * count) / sum(count).
double histogram_average(const std::array<std::size_t, 5>& histogram);

struct WinTieLose {
    std::size_t wins = 0;
    std::size_t ties = 0;
    std::size_t losses = 0;
};

/// From `model_a`'s point of view. Single scores are compared per metric
/// (higher wins); pairwise ranks under the key "rank" (lower wins).
std::map<std::string, WinTieLose> win_tie_lose(std::span<const JudgeRecord> records, const std::string& model_a,
                                               const std::string& model_b);

struct RankDistribution {
    std::vector<std::string> models;             // sorted
    std::vector<std::vector<double>> fractions;  // [model][rank-1]
    std::size_t records = 0;
};

RankDistribution rank_distribution(std::span<const JudgeRecord> records);

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

json to_json(const EvalReport& report);
std::string render_table(const EvalReport& report);

json to_json(const std::vector<CurvePoint>& curve);
std::string render_curve_csv(const std::vector<CurvePoint>& curve);
std::string render_curve_table(const std::vector<CurvePoint>& curve);

struct JudgeReport {
    std::map<std::string, std::map<std::string, ScoreSummary>> scores;
    std::map<std::string, std::map<std::string, WinTieLose>> pairs;  // "A vs B" -> metric -> counts
    std::optional<RankDistribution> ranks;
};

JudgeReport judge_report(std::span<const JudgeRecord> records);
json to_json(const JudgeReport& report);
std::string render_table(const JudgeReport& report);

}  // namespace refrag::eval
