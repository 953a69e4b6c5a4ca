// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <sstream>

#include "refrag/error.hpp"
#include "refrag/json_io.hpp"
#include "refrag/text.hpp"

namespace refrag::eval {

namespace {

void check_k(std::size_t k) {
    if (k < 1) throw UsageError("k must be >= 1");
}

void check_distinct(std::span<const std::string> ranked) {
    std::set<std::string_view> seen;
    for (const auto& id : ranked) {
        if (!seen.insert(id).second) throw UsageError("ranked list repeats chunk id \"" + id + "\"");
    }
}

template <typename Fn>
void for_each_line(std::istream& in, const std::string& origin, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const auto where = origin + ":" + std::to_string(line_no);
        fn(parse_record(line, where), where);
    }
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

double average_precision_at_k(std::span<const std::string> ranked, const std::set<std::string>& gold,
                              std::size_t k) {
    check_k(k);
    if (gold.empty()) throw UsageError("average precision needs at least one gold id");
    check_distinct(ranked);
    double sum = 0.0;
    std::size_t hits = 0;
    const std::size_t depth = std::min(k, ranked.size());
    for (std::size_t r = 0; r < depth; ++r) {
        if (gold.contains(ranked[r])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(r + 1);
        }
    }
    return sum / static_cast<double>(std::min(gold.size(), k));
}

int success_at_k(std::span<const std::string> ranked, const std::set<std::string>& gold, std::size_t k) {
    check_k(k);
    const std::size_t depth = std::min(k, ranked.size());
    for (std::size_t r = 0; r < depth; ++r) {
        if (gold.contains(ranked[r])) return 1;
    }
    return 0;
}

EvalReport evaluate_run(std::span<const RunEntry> run, const GoldMap& gold, std::span<const std::size_t> ks) {
    if (ks.empty()) throw UsageError("evaluate_run: no k values requested");
    for (auto k : ks) check_k(k);

    std::vector<const RunEntry*> entries;
    for (const auto& e : run) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(), [](const RunEntry* a, const RunEntry* b) { return a->qid < b->qid; });

    EvalReport report;
    report.config["ks"] = std::vector<std::size_t>(ks.begin(), ks.end());
    std::size_t failed = 0;
    for (const auto* e : entries) {
        auto it = gold.find(e->qid);
        if (it == gold.end() || it->second.empty()) {
            throw DataError("qid \"" + e->qid + "\" has no gold chunk ids");
        }
        QueryBreakdown q{e->qid, {}, e->failed};
        const std::vector<std::string> none;
        const auto& ranked = e->failed ? none : e->ranked;
        for (auto k : ks) {
            q.values["MAP@" + std::to_string(k)] = average_precision_at_k(ranked, it->second, k);
            q.values["Success@" + std::to_string(k)] = success_at_k(ranked, it->second, k);
        }
        if (e->failed || e->ranked.empty()) ++failed;
        report.per_query.push_back(std::move(q));
    }
    if (report.per_query.empty()) throw DataError("evaluate_run: run has no queries");

    for (const auto& q : report.per_query) {
        for (const auto& [name, v] : q.values) report.aggregates[name] += v;
    }
    for (auto& [name, v] : report.aggregates) v /= static_cast<double>(report.per_query.size());
    report.counts["queries"] = report.per_query.size();
    report.counts["failed"] = failed;
    return report;
}

std::vector<RunEntry> parse_run(std::istream& in, const std::string& origin) {
    std::vector<RunEntry> out;
    std::set<std::string> qids;
    for_each_line(in, origin, [&](const json& rec, const std::string& where) {
        RunEntry e;
        e.qid = require_string(rec, "qid", where);
        if (!qids.insert(e.qid).second) throw DataError(where + ": duplicate qid \"" + e.qid + "\"");
        e.ranked = require_string_list(rec, "ranked", where);
        if (auto it = rec.find("failed"); it != rec.end()) {
            if (!it->is_boolean()) throw DataError(where + ": field 'failed' must be a boolean");
            e.failed = it->get<bool>();
        }
        std::set<std::string> seen;
        for (const auto& id : e.ranked) {
            if (!seen.insert(id).second) {
                throw DataError(where + ": field 'ranked' repeats chunk id \"" + id + "\"");
            }
        }
        out.push_back(std::move(e));
    });
    return out;
}

std::vector<ReferenceAnnotation> parse_annotations(std::istream& in, const std::string& origin) {
    std::vector<ReferenceAnnotation> out;
    for_each_line(in, origin, [&](const json& rec, const std::string& where) {
        ReferenceAnnotation a;
        a.qid = require_string(rec, "qid", where);
        a.sentences = require_string_list(rec, "sentences", where);
        const auto& refs = require_field(rec, "sentence_refs", where);
        if (!refs.is_array()) throw DataError(where + ": field 'sentence_refs' must be an array");
        for (const auto& r : refs) {
            if (!r.is_array() || r.empty()) {
                throw DataError(where + ": every 'sentence_refs' entry must be a non-empty array of ids");
            }
            std::set<std::string> ids;
            for (const auto& id : r) {
                if (!id.is_string()) throw DataError(where + ": 'sentence_refs' ids must be strings");
                ids.insert(id.get<std::string>());
            }
            a.sentence_refs.push_back(std::move(ids));
        }
        if (a.sentence_refs.size() != a.sentences.size()) {
            throw DataError(where + ": qid \"" + a.qid + "\" has " + std::to_string(a.sentences.size()) +
                            " sentences but " + std::to_string(a.sentence_refs.size()) + " reference sets");
        }
        if (a.sentences.empty()) throw DataError(where + ": qid \"" + a.qid + "\" has no sentences");
        out.push_back(std::move(a));
    });
    return out;
}

PrecisionResult sentence_precision(const ReferenceAlignment& alignment, const ReferenceAnnotation& annotation) {
    if (alignment.sentence_count() != annotation.sentence_refs.size()) {
        throw DataError("qid \"" + annotation.qid + "\": alignment covers " +
                        std::to_string(alignment.sentence_count()) + " sentences but annotation has " +
                        std::to_string(annotation.sentence_refs.size()));
    }
    PrecisionResult r;
    for (const auto& seg : alignment.segments) {
        if (!seg.referenced) continue;
        const auto& primary = seg.chunk_ids.front();
        for (std::size_t s = seg.start; s <= seg.end; ++s) {
            ++r.counted;
            if (annotation.sentence_refs[s - 1].contains(primary)) ++r.matched;
        }
    }
    if (r.counted > 0) r.precision = static_cast<double>(r.matched) / static_cast<double>(r.counted);
    return r;
}

std::vector<CurvePoint> precision_threshold_curve(std::span<const AnnotatedAlignment> items,
                                                  std::span<const double> thresholds) {
    std::vector<CurvePoint> out;
    for (double tau : thresholds) {
        CurvePoint p;
        p.threshold = tau;
        double precision_sum = 0.0;
        std::size_t referenced = 0;
        std::size_t total = 0;
        for (const auto& item : items) {
            const auto r = sentence_precision(apply_threshold(item.alignment, tau), item.annotation);
            referenced += r.counted;
            total += item.annotation.sentence_refs.size();
            if (r.precision) {
                precision_sum += *r.precision;
                ++p.answers_with_data;
            } else {
                ++p.answers_without_data;
            }
        }
        if (p.answers_with_data > 0) p.mean_precision = precision_sum / static_cast<double>(p.answers_with_data);
        p.coverage = total == 0 ? 0.0 : static_cast<double>(referenced) / static_cast<double>(total);
        out.push_back(p);
    }
    return out;
}

std::vector<JudgeRecord> parse_judge(std::istream& in, const std::string& origin) {
    std::vector<JudgeRecord> out;
    for_each_line(in, origin, [&](const json& rec, const std::string& where) {
        JudgeRecord r;
        r.qid = require_string(rec, "qid", where);
        const auto kind = require_string(rec, "kind", where);
        auto read_int_map = [&](const char* field, std::map<std::string, int>& dst) {
            const auto& obj = require_field(rec, field, where);
            if (!obj.is_object() || obj.empty()) {
                throw DataError(where + ": field '" + field + "' must be a non-empty object");
            }
            for (const auto& [key, v] : obj.items()) {
                if (!v.is_number_integer()) {
                    throw DataError(where + ": field '" + field + "." + key + "' must be an integer");
                }
                dst[key] = v.get<int>();
            }
        };
        if (kind == "single_score") {
            r.kind = JudgeKind::single_score;
            r.model = require_string(rec, "model", where);
            read_int_map("scores", r.scores);
            for (const auto& [metric, s] : r.scores) {
                if (s < 1 || s > 5) {
                    throw DataError(where + ": score " + std::to_string(s) + " for '" + metric +
                                    "' is outside 1..5");
                }
            }
        } else if (kind == "pairwise_rank") {
            r.kind = JudgeKind::pairwise_rank;
            read_int_map("ranks", r.ranks);
            std::vector<int> ranks;
            for (const auto& [m, v] : r.ranks) ranks.push_back(v);
            std::sort(ranks.begin(), ranks.end());
            for (std::size_t i = 0; i < ranks.size(); ++i) {
                if (ranks[i] != static_cast<int>(i) + 1) {
                    throw DataError(where + ": ranks for qid \"" + r.qid + "\" are not a permutation of 1.." +
                                    std::to_string(ranks.size()));
                }
            }
        } else {
            throw DataError(where + ": field 'kind' must be single_score or pairwise_rank");
        }
        out.push_back(std::move(r));
    });
    return out;
}

double histogram_average(const std::array<std::size_t, 5>& histogram) {
    std::size_t weighted = 0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < histogram.size(); ++s) {
        weighted += (s + 1) * histogram[s];
        count += histogram[s];
    }
    if (count == 0) throw UsageError("histogram is empty");
    return static_cast<double>(weighted) / static_cast<double>(count);
}

std::map<std::string, std::map<std::string, ScoreSummary>> aggregate_judge_scores(
    std::span<const JudgeRecord> records, std::span<const std::string> metrics) {
    const std::set<std::string> wanted(metrics.begin(), metrics.end());
    std::map<std::string, std::map<std::string, ScoreSummary>> out;
    for (const auto& r : records) {
        if (r.kind != JudgeKind::single_score) {
            throw UsageError("aggregate_judge_scores: record for qid \"" + r.qid + "\" is not a single score");
        }
        for (const auto& [metric, s] : r.scores) {
            if (!wanted.empty() && !wanted.contains(metric)) continue;
            if (s < 1 || s > 5) throw DataError("qid \"" + r.qid + "\": score outside 1..5");
            auto& summary = out[r.model][metric];
            ++summary.histogram[static_cast<std::size_t>(s - 1)];
            ++summary.count;
        }
    }
    for (auto& [model, by_metric] : out) {
        for (auto& [metric, summary] : by_metric) summary.average = histogram_average(summary.histogram);
    }
    return out;
}

std::map<std::string, WinTieLose> win_tie_lose(std::span<const JudgeRecord> records, const std::string& model_a,
                                               const std::string& model_b) {
    // qid -> model -> scores
    std::map<std::string, std::map<std::string, const JudgeRecord*>> singles;
    std::vector<const JudgeRecord*> rankings;
    for (const auto& r : records) {
        if (r.kind == JudgeKind::single_score) {
            if (r.model == model_a || r.model == model_b) singles[r.qid][r.model] = &r;
        } else if (r.ranks.contains(model_a) || r.ranks.contains(model_b)) {
            rankings.push_back(&r);
        }
    }

    std::map<std::string, WinTieLose> out;
    auto tally = [](WinTieLose& w, int a_value, int b_value, bool higher_is_better) {
        if (a_value == b_value) {
            ++w.ties;
        } else if ((a_value > b_value) == higher_is_better) {
            ++w.wins;
        } else {
            ++w.losses;
        }
    };

    for (const auto& [qid, by_model] : singles) {
        auto a = by_model.find(model_a);
        auto b = by_model.find(model_b);
        if (a == by_model.end() || b == by_model.end()) {
            throw DataError("qid \"" + qid + "\" lacks a score for model \"" +
                            (a == by_model.end() ? model_a : model_b) + "\"");
        }
        for (const auto& [metric, sa] : a->second->scores) {
            auto sb = b->second->scores.find(metric);
            if (sb == b->second->scores.end()) {
                throw DataError("qid \"" + qid + "\" lacks metric '" + metric + "' for model \"" + model_b + "\"");
            }
            tally(out[metric], sa, sb->second, true);
        }
    }
    for (const auto* r : rankings) {
        auto a = r->ranks.find(model_a);
        auto b = r->ranks.find(model_b);
        if (a == r->ranks.end() || b == r->ranks.end()) {
            throw DataError("qid \"" + r->qid + "\" lacks a rank for model \"" +
                            (a == r->ranks.end() ? model_a : model_b) + "\"");
        }
        tally(out["rank"], a->second, b->second, false);
    }
    return out;
}

RankDistribution rank_distribution(std::span<const JudgeRecord> records) {
    RankDistribution d;
    std::map<std::string, std::vector<std::size_t>> counts;
    for (const auto& r : records) {
        if (r.kind != JudgeKind::pairwise_rank) continue;
        std::vector<std::string> models;
        for (const auto& [m, rank] : r.ranks) models.push_back(m);
        if (d.records == 0) {
            d.models = models;
            for (const auto& m : models) counts[m].assign(models.size(), 0);
        } else if (models != d.models) {
            throw DataError("qid \"" + r.qid + "\" ranks a different model set");
        }
        std::vector<bool> used(models.size(), false);
        for (const auto& [m, rank] : r.ranks) {
            if (rank < 1 || static_cast<std::size_t>(rank) > models.size() || used[rank - 1]) {
                throw DataError("qid \"" + r.qid + "\": ranks are not a permutation of 1.." +
                                std::to_string(models.size()));
            }
            used[rank - 1] = true;
            ++counts[m][static_cast<std::size_t>(rank - 1)];
        }
        ++d.records;
    }
    if (d.records == 0) throw UsageError("rank_distribution: no pairwise_rank records");
    for (const auto& m : d.models) {
        std::vector<double> row;
        for (auto c : counts[m]) row.push_back(static_cast<double>(c) / static_cast<double>(d.records));
        d.fractions.push_back(std::move(row));
    }
    return d;
}

json to_json(const EvalReport& report) {
    json per_query = json::array();
    for (const auto& q : report.per_query) {
        json entry{{"qid", q.qid}, {"failed", q.failed}};
        for (const auto& [k, v] : q.values) entry[k] = v;
        per_query.push_back(std::move(entry));
    }
    return json{{"aggregates", report.aggregates},
                {"per_query", per_query},
                {"config", report.config},
                {"counts", report.counts}};
}

std::string render_table(const EvalReport& report) {
    std::ostringstream os;
    std::size_t width = 6;
    for (const auto& [name, v] : report.aggregates) width = std::max(width, name.size());
    os << pad("metric", width + 2) << "value\n";
    for (const auto& [name, v] : report.aggregates) os << pad(name, width + 2) << fixed(v, 4) << "\n";
    for (const auto& [name, c] : report.counts) os << pad(name, width + 2) << c << "\n";
    return os.str();
}

json to_json(const std::vector<CurvePoint>& curve) {
    json out = json::array();
    for (const auto& p : curve) {
        out.push_back({{"threshold", p.threshold},
                       {"mean_precision", p.mean_precision ? json(*p.mean_precision) : json(nullptr)},
                       {"coverage", p.coverage},
                       {"answers_with_data", p.answers_with_data},
                       {"answers_without_data", p.answers_without_data}});
    }
    return out;
}

std::string render_curve_csv(const std::vector<CurvePoint>& curve) {
    std::ostringstream os;
    os << "threshold,mean_precision,coverage,answers_with_data,answers_without_data\n";
    for (const auto& p : curve) {
        os << fixed(p.threshold, 4) << ',' << (p.mean_precision ? fixed(*p.mean_precision, 6) : "") << ','
           << fixed(p.coverage, 6) << ',' << p.answers_with_data << ',' << p.answers_without_data << '\n';
    }
    return os.str();
}

std::string render_curve_table(const std::vector<CurvePoint>& curve) {
    std::ostringstream os;
    os << "threshold  precision  coverage  answers  no-data\n";
    for (const auto& p : curve) {
        os << pad(fixed(p.threshold, 2), 11) << pad(p.mean_precision ? fixed(*p.mean_precision, 4) : "n/a", 11)
           << pad(fixed(p.coverage, 4), 10) << pad(std::to_string(p.answers_with_data), 9)
           << p.answers_without_data << '\n';
    }
    return os.str();
}

JudgeReport judge_report(std::span<const JudgeRecord> records) {
    JudgeReport report;
    std::vector<JudgeRecord> singles;
    std::vector<JudgeRecord> rankings;
    std::set<std::string> single_models;
    std::set<std::string> ranked_models;
    for (const auto& r : records) {
        if (r.kind == JudgeKind::single_score) {
            singles.push_back(r);
            single_models.insert(r.model);
        } else {
            rankings.push_back(r);
            for (const auto& [m, v] : r.ranks) ranked_models.insert(m);
        }
    }
    if (!singles.empty()) report.scores = aggregate_judge_scores(singles);
    if (!rankings.empty()) report.ranks = rank_distribution(rankings);

    auto add_pairs = [&](const std::vector<JudgeRecord>& subset, const std::set<std::string>& models) {
        for (auto a = models.begin(); a != models.end(); ++a) {
            for (auto b = std::next(a); b != models.end(); ++b) {
                for (auto& [metric, w] : win_tie_lose(subset, *a, *b)) {
                    report.pairs[*a + " vs " + *b][metric] = w;
                }
            }
        }
    };
    add_pairs(singles, single_models);
    add_pairs(rankings, ranked_models);
    return report;
}

json to_json(const JudgeReport& report) {
    json scores = json::object();
    for (const auto& [model, by_metric] : report.scores) {
        for (const auto& [metric, s] : by_metric) {
            scores[model][metric] = {{"average", s.average}, {"histogram", s.histogram}, {"count", s.count}};
        }
    }
    json pairs = json::object();
    for (const auto& [pair, by_metric] : report.pairs) {
        for (const auto& [metric, w] : by_metric) {
            pairs[pair][metric] = {{"wins", w.wins}, {"ties", w.ties}, {"losses", w.losses}};
        }
    }
    json out{{"scores", scores}, {"win_tie_lose", pairs}};
    if (report.ranks) {
        json rows = json::object();
        for (std::size_t m = 0; m < report.ranks->models.size(); ++m) {
            rows[report.ranks->models[m]] = report.ranks->fractions[m];
        }
        out["rank_distribution"] = {{"records", report.ranks->records}, {"fractions", rows}};
    }
    return out;
}

std::string render_table(const JudgeReport& report) {
    std::ostringstream os;
    if (!report.scores.empty()) {
        std::map<std::string, std::map<std::string, const ScoreSummary*>> by_metric;
        for (const auto& [model, metrics] : report.scores) {
            for (const auto& [metric, s] : metrics) by_metric[metric][model] = &s;
        }
        os << pad("metric", 18) << pad("model", 10) << pad("avg", 7) << "    1    2    3    4    5\n";
        for (const auto& [metric, models] : by_metric) {
            for (const auto& [model, s] : models) {
                os << pad(metric, 18) << pad(model, 10) << pad(fixed(s->average, 2), 7);
                for (auto c : s->histogram) {
                    auto cell = std::to_string(c);
                    os << std::string(5 - std::min<std::size_t>(5, cell.size()), ' ') << cell;
                }
                os << '\n';
            }
        }
    }
    if (!report.pairs.empty()) {
        os << '\n' << pad("pair", 20) << pad("metric", 18) << "  win  tie lose\n";
        for (const auto& [pair, metrics] : report.pairs) {
            for (const auto& [metric, w] : metrics) {
                os << pad(pair, 20) << pad(metric, 18);
                for (auto c : {w.wins, w.ties, w.losses}) {
                    auto cell = std::to_string(c);
                    os << std::string(5 - std::min<std::size_t>(5, cell.size()), ' ') << cell;
                }
                os << '\n';
            }
        }
    }
    if (report.ranks) {
        os << '\n' << pad("model", 10);
        for (std::size_t r = 1; r <= report.ranks->models.size(); ++r) os << pad("rank " + std::to_string(r), 9);
        os << '\n';
        for (std::size_t m = 0; m < report.ranks->models.size(); ++m) {
            os << pad(report.ranks->models[m], 10);
            for (double f : report.ranks->fractions[m]) os << pad(fixed(f, 3), 9);
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace refrag::eval
