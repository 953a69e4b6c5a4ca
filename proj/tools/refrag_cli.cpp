// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "refrag/refrag.h"

using nlohmann::json;

namespace {

// Carries a C API status out of nested helpers.
struct Failure {
    refrag_status status;
    std::string message;
};

void check(refrag_status status) {
    if (status != REFRAG_OK) throw Failure{status, refrag_last_error()};
}

std::string take(char* s) {
    std::string out = s ? s : "";
    refrag_free_string(s);
    return out;
}

struct EngineDeleter {
    void operator()(refrag_engine* e) const { refrag_engine_destroy(e); }
};
using EnginePtr = std::unique_ptr<refrag_engine, EngineDeleter>;

struct Common {
    std::string config;
    std::optional<std::string> corpus, qa, version, mode, scorer, generator;
    std::optional<int> n, k;
    std::optional<double> threshold, tie_epsilon;
    std::uint64_t seed = 0;
    bool as_json = false;
    std::string out;

    json overrides() const {
        json o = json::object();
        if (corpus) o["corpus"] = *corpus;
        if (qa) o["qa"] = *qa;
        if (version) o["version"] = *version;
        if (mode) o["mode"] = *mode;
        if (scorer) o["scorer"] = *scorer;
        if (generator) o["generator"] = *generator;
        if (n) o["n"] = *n;
        if (k) o["k"] = *k;
        if (threshold) o["threshold"] = *threshold;
        if (tie_epsilon) o["tie_epsilon"] = *tie_epsilon;
        return o;
    }

    // Per-request options; config defaults fill the rest inside the engine.
    json request() const {
        json r = json::object();
        if (n) r["n"] = *n;
        if (k) r["k"] = *k;
        if (threshold) r["threshold"] = *threshold;
        if (tie_epsilon) r["tie_epsilon"] = *tie_epsilon;
        if (mode) r["mode"] = *mode;
        if (version) r["version"] = *version;
        return r;
    }
};

void add_output_flags(CLI::App* sub, Common& c) {
    sub->add_flag("--json", c.as_json, "Print the JSON report instead of a table");
    sub->add_option("--out", c.out, "Write output to this file instead of stdout");
}

void add_engine_flags(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "key = value configuration file");
    sub->add_option("--corpus", c.corpus, "Chunk corpus (JSON lines)");
    sub->add_option("--qa", c.qa, "QA pairs (JSON lines)");
    sub->add_option("--version", c.version, "Chunk text version")->check(CLI::IsMember({"ver0", "ver1"}));
    sub->add_option("--n", c.n, "Retrieval depth")->check(CLI::PositiveNumber);
    sub->add_option("--k", c.k, "Re-ranking depth (k <= n)")->check(CLI::PositiveNumber);
    sub->add_option("--threshold", c.threshold, "Reference threshold");
    sub->add_option("--tie-epsilon", c.tie_epsilon, "Attach chunks scoring within this margin of the best")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--mode", c.mode, "Segment selection")
        ->check(CLI::IsMember({"paper-literal", "global-sum"}));
    sub->add_option("--scorer", c.scorer, "Scoring backend")->check(CLI::IsMember({"lexical", "remote"}));
    sub->add_option("--generator", c.generator, "Answer generator")->check(CLI::IsMember({"extractive", "remote"}));
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    add_output_flags(sub, c);
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw Failure{REFRAG_ERR_USAGE, "cannot write " + c.out};
    f << text;
}

EnginePtr open_engine(const Common& c, bool need_qa) {
    refrag_engine* raw = nullptr;
    check(refrag_engine_create(c.config.empty() ? nullptr : c.config.c_str(), c.overrides().dump().c_str(), &raw));
    EnginePtr engine(raw);
    check(refrag_engine_load_corpus(engine.get(), nullptr));
    const auto status = refrag_engine_load_qa(engine.get(), nullptr);
    if (status != REFRAG_OK && (need_qa || status != REFRAG_ERR_USAGE)) check(status);
    return engine;
}

std::string fmt_score(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v;
    return s.str();
}

std::string render_ranked(const json& list, const std::string& title) {
    std::ostringstream s;
    s << title << ":\n";
    int rank = 1;
    for (const auto& e : list) {
        s << "  " << std::setw(3) << rank++ << "  " << e["chunk_id"].get<std::string>() << "  "
          << fmt_score(e["score"].get<double>()) << '\n';
    }
    return s.str();
}

std::string render_segments(const json& alignment, const std::vector<std::string>& sentences) {
    std::ostringstream s;
    int index = 1;
    for (const auto& seg : alignment["segments"]) {
        const auto start = seg["start"].get<std::size_t>();
        const auto end = seg["end"].get<std::size_t>();
        s << "segment " << index++ << "  sentences " << start << "-" << end << "  ";
        if (seg["referenced"].get<bool>()) {
            std::string ids;
            for (const auto& id : seg["chunk_ids"]) ids += (ids.empty() ? "" : ", ") + id.get<std::string>();
            s << "-> " << ids;
        } else {
            s << "(no source)";
        }
        s << "  score " << fmt_score(seg["score"].get<double>()) << '\n';
        for (std::size_t i = start; i <= end && i <= sentences.size(); ++i) {
            s << "  " << i << ". " << sentences[i - 1] << '\n';
        }
    }
    return s.str();
}

std::string render_describe(const json& d) {
    std::ostringstream s;
    s << "chunks: " << d["chunks"] << '\n';
    for (const auto& [k, v] : d["by_source"].items()) s << "  source " << k << ": " << v << '\n';
    for (const auto& [k, v] : d["by_split"].items()) s << "  split " << k << ": " << v << '\n';
    if (d.contains("qa_pairs")) {
        s << "qa pairs: " << d["qa_pairs"] << '\n';
        for (const auto& [k, v] : d["qa_by_split"].items()) s << "  split " << k << ": " << v << '\n';
    }
    return s.str();
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Failure{REFRAG_ERR_DATA, "cannot open " + path};
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Failure{REFRAG_ERR_DATA, path + ": " + e.what()};
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"refrag: retrieval, re-ranking and sentence-level reference matching"};
    app.require_subcommand(1);
    app.set_version_flag("--about", std::string("refrag ") + refrag_version());

    Common c;
    std::string question;

    auto* ingest = app.add_subcommand("ingest", "Validate a corpus (and QA file) and report counts");
    add_engine_flags(ingest, c);

    auto* query = app.add_subcommand("query", "Retrieve, re-rank, generate and match references");
    add_engine_flags(query, c);
    query->add_option("question", question, "Question text")->required();

    auto* retrieve = app.add_subcommand("retrieve", "Rank the corpus for a question");
    add_engine_flags(retrieve, c);
    retrieve->add_option("question", question, "Question text")->required();

    auto* rerank = app.add_subcommand("rerank", "Retrieve then re-rank the top n");
    add_engine_flags(rerank, c);
    rerank->add_option("question", question, "Question text")->required();

    std::string input;
    std::vector<std::string> sentences, chunk_ids;
    auto* match = app.add_subcommand("match", "Align answer sentences with chunks");
    add_engine_flags(match, c);
    match->add_option("--input", input, "JSON request with sentences and chunk_ids or chunks");
    match->add_option("--sentence", sentences, "Answer sentence (repeat in order)");
    match->add_option("--chunk", chunk_ids, "Chunk id from the corpus (repeat)");

    std::vector<std::string> runs;
    std::vector<int> ks;
    std::string split;
    auto* eval_retrieval = app.add_subcommand("eval-retrieval", "MAP@k and Success@k for run files or the QA split");
    add_engine_flags(eval_retrieval, c);
    eval_retrieval->add_option("--run", runs, "Run file (JSON lines of qid, ranked, failed); repeatable");
    eval_retrieval->add_option("--ks", ks, "Cutoffs (default 1 5 10)")->check(CLI::PositiveNumber);
    eval_retrieval->add_option("--split", split, "QA split to run when no run file is given (default test)")
        ->check(CLI::IsMember({"train", "val", "test"}));

    std::string annotations, alignments, csv;
    std::vector<double> thresholds;
    auto* eval_match = app.add_subcommand("eval-match", "Sentence-level reference precision and threshold curve");
    add_engine_flags(eval_match, c);
    eval_match->add_option("--annotations", annotations, "Annotated answers (JSON lines)")->required();
    eval_match->add_option("--alignments", alignments, "Precomputed alignments (JSON lines); default: match live");
    eval_match->add_option("--thresholds", thresholds, "Curve thresholds (default 0 0.25 0.5 0.75)");
    eval_match->add_option("--csv", csv, "Also write the curve as CSV to this file");

    std::string judge_file;
    auto* eval_judge = app.add_subcommand("eval-judge", "Aggregate LLM-judge scores and rankings");
    eval_judge->add_option("--input", judge_file, "Judge records (JSON lines)")->required();
    add_output_flags(eval_judge, c);

    auto* export_pairs = app.add_subcommand("export-pairs", "Write re-ranker training pairs (1 positive, 3 negatives)");
    add_engine_flags(export_pairs, c);

    std::string listen;
    auto* serve = app.add_subcommand("serve", "Start the HTTP service");
    add_engine_flags(serve, c);
    serve->add_option("--listen", listen, "host:port (port 0 picks a free port)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return REFRAG_ERR_USAGE;
    }

    try {
        if (*ingest) {
            auto engine = open_engine(c, false);
            const auto d = json::parse(take([&] {
                char* out = nullptr;
                check(refrag_engine_describe(engine.get(), &out));
                return out;
            }()));
            emit(c, c.as_json ? d.dump(2) + "\n" : render_describe(d));
        } else if (*query || *retrieve || *rerank) {
            auto engine = open_engine(c, false);
            auto req = c.request();
            req["question"] = question;
            char* out = nullptr;
            if (*query) {
                check(refrag_engine_query(engine.get(), req.dump().c_str(), &out));
            } else if (*retrieve) {
                check(refrag_engine_retrieve(engine.get(), req.dump().c_str(), &out));
            } else {
                check(refrag_engine_rerank(engine.get(), req.dump().c_str(), &out));
            }
            const auto result = json::parse(take(out));
            if (c.as_json) {
                emit(c, result.dump(2) + "\n");
            } else if (*query) {
                std::ostringstream s;
                s << "question: " << question << "\n" << render_ranked(result["reranked"], "reranked") << "answer ("
                  << result["generator"].get<std::string>() << ", " << result["mode"].get<std::string>()
                  << ", threshold " << fmt_score(result["threshold"].get<double>()) << "):\n"
                  << render_segments(result, result["answer_sentences"].get<std::vector<std::string>>());
                emit(c, s.str());
            } else {
                std::string text = render_ranked(result["retrieved"], "retrieved");
                if (result.contains("reranked")) text += render_ranked(result["reranked"], "reranked");
                emit(c, text);
            }
        } else if (*match) {
            json req = input.empty() ? json::object() : read_json_file(input);
            if (!req.is_object()) throw Failure{REFRAG_ERR_USAGE, "--input must hold a JSON object"};
            req.update(c.request());
            if (!sentences.empty()) req["sentences"] = sentences;
            if (!chunk_ids.empty()) req["chunk_ids"] = chunk_ids;
            if (!req.contains("sentences")) throw Failure{REFRAG_ERR_USAGE, "match needs --sentence or --input"};
            if (!req.contains("chunk_ids") && !req.contains("chunks")) {
                throw Failure{REFRAG_ERR_USAGE, "match needs --chunk or --input with chunks"};
            }
            auto engine = open_engine(c, false);
            char* out = nullptr;
            check(refrag_engine_match(engine.get(), req.dump().c_str(), &out));
            const auto result = json::parse(take(out));
            emit(c, c.as_json ? result.dump(2) + "\n"
                              : render_segments(result, req["sentences"].get<std::vector<std::string>>()));
        } else if (*eval_retrieval) {
            auto engine = open_engine(c, true);
            auto req = c.request();
            if (!runs.empty()) req["runs"] = runs;
            if (!ks.empty()) req["ks"] = ks;
            if (!split.empty()) req["split"] = split;
            char* out = nullptr;
            check(refrag_engine_eval_retrieval(engine.get(), req.dump().c_str(), &out));
            const auto result = json::parse(take(out));
            emit(c, c.as_json ? result["reports"].dump(2) + "\n" : result["text"].get<std::string>());
        } else if (*eval_match) {
            auto engine = open_engine(c, alignments.empty());
            auto req = c.request();
            req["annotations"] = annotations;
            if (!alignments.empty()) req["alignments"] = alignments;
            if (!thresholds.empty()) req["thresholds"] = thresholds;
            char* out = nullptr;
            check(refrag_engine_eval_match(engine.get(), req.dump().c_str(), &out));
            auto result = json::parse(take(out));
            if (!csv.empty()) {
                std::ofstream f(csv, std::ios::binary);
                if (!f) throw Failure{REFRAG_ERR_USAGE, "cannot write " + csv};
                f << result["csv"].get<std::string>();
            }
            const auto text = result["text"].get<std::string>();
            result.erase("text");
            result.erase("csv");
            emit(c, c.as_json ? result.dump(2) + "\n" : text);
        } else if (*eval_judge) {
            char* out = nullptr;
            check(refrag_eval_judge(judge_file.c_str(), &out));
            const auto result = json::parse(take(out));
            emit(c, c.as_json ? result["report"].dump(2) + "\n" : result["text"].get<std::string>());
        } else if (*export_pairs) {
            auto engine = open_engine(c, true);
            char* out = nullptr;
            check(refrag_engine_export_pairs(engine.get(), c.seed, &out));
            emit(c, take(out));
        } else if (*serve) {
            auto overrides = c.overrides();
            if (!listen.empty()) overrides["listen"] = listen;
            check(refrag_serve(c.config.empty() ? nullptr : c.config.c_str(), overrides.dump().c_str()));
        }
    } catch (const Failure& f) {
        std::cerr << "refrag: " << refrag_status_name(f.status) << ": " << f.message << '\n';
        return f.status;
    } catch (const std::exception& e) {
        std::cerr << "refrag: internal error: " << e.what() << '\n';
        return REFRAG_ERR_INTERNAL;
    }
    return REFRAG_OK;
}
