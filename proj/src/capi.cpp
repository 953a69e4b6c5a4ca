// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/refrag.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "refrag/engine.hpp"
#include "refrag/error.hpp"
#include "refrag/json_io.hpp"
#include "refrag/service.hpp"
#include "refrag/version.hpp"

using refrag::json;

struct refrag_engine {
    std::unique_ptr<refrag::Engine> engine;
};

namespace {

thread_local std::string g_last_error;

refrag_status fail(refrag_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <typename Fn>
refrag_status guarded(Fn&& fn) {
    try {
        g_last_error.clear();
        fn();
        return REFRAG_OK;
    } catch (const refrag::Error& e) {
        return fail(static_cast<refrag_status>(e.kind()), e.what());
    } catch (const json::exception& e) {
        return fail(REFRAG_ERR_USAGE, std::string("invalid JSON: ") + e.what());
    } catch (const std::exception& e) {
        return fail(REFRAG_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(REFRAG_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse_request(const char* request_json) {
    if (!request_json || !*request_json) return json::object();
    auto j = json::parse(request_json);
    if (!j.is_object()) throw refrag::UsageError("request must be a JSON object");
    return j;
}

void require(const void* p, const char* what) {
    if (!p) throw refrag::UsageError(std::string(what) + " must not be NULL");
}

std::string require_question(const json& req) {
    auto it = req.find("question");
    if (it == req.end() || !it->is_string() || refrag::text::trim(it->get<std::string>()).empty()) {
        throw refrag::UsageError("question is empty");
    }
    return it->get<std::string>();
}

std::ifstream open(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw refrag::DataError("cannot open " + path);
    return in;
}

std::vector<std::size_t> read_ks(const json& req) {
    std::vector<std::size_t> ks{1, 5, 10};
    if (auto it = req.find("ks"); it != req.end() && !it->is_null()) {
        ks.clear();
        for (const auto& v : *it) {
            if (!v.is_number_integer() || v.get<long long>() < 1) throw refrag::UsageError("ks must be positive integers");
            ks.push_back(v.get<std::size_t>());
        }
        if (ks.empty()) throw refrag::UsageError("ks must not be empty");
    }
    return ks;
}

std::vector<double> read_thresholds(const json& req) {
    std::vector<double> out;
    if (auto it = req.find("thresholds"); it != req.end() && !it->is_null()) {
        for (const auto& v : *it) {
            if (!v.is_number()) throw refrag::UsageError("thresholds must be numbers");
            out.push_back(v.get<double>());
        }
        if (out.empty()) throw refrag::UsageError("thresholds must not be empty");
    } else {
        out = {0.0, 0.25, 0.5, 0.75};
    }
    return out;
}

}  // namespace

extern "C" {

const char* refrag_version(void) { return refrag::kVersion; }

const char* refrag_last_error(void) { return g_last_error.c_str(); }

const char* refrag_status_name(refrag_status status) {
    switch (status) {
        case REFRAG_OK: return "ok";
        case REFRAG_ERR_USAGE: return "usage error";
        case REFRAG_ERR_DATA: return "data error";
        case REFRAG_ERR_BACKEND: return "backend error";
        case REFRAG_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

void refrag_free_string(char* s) { std::free(s); }

refrag_status refrag_engine_create(const char* config_path, const char* overrides_json, refrag_engine** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        const auto overrides = parse_request(overrides_json);
        auto cfg = refrag::load_config(config_path ? config_path : "", overrides);
        auto handle = std::make_unique<refrag_engine>();
        handle->engine = std::make_unique<refrag::Engine>(std::move(cfg));
        *out = handle.release();
    });
}

void refrag_engine_destroy(refrag_engine* engine) { delete engine; }

refrag_status refrag_engine_load_corpus(refrag_engine* engine, const char* path) {
    return guarded([&] {
        require(engine, "engine");
        std::string p = path ? path : engine->engine->config().corpus;
        if (p.empty()) throw refrag::UsageError("no corpus path given");
        engine->engine->load_corpus(p);
    });
}

refrag_status refrag_engine_load_qa(refrag_engine* engine, const char* path) {
    return guarded([&] {
        require(engine, "engine");
        std::string p = path ? path : engine->engine->config().qa;
        if (p.empty()) throw refrag::UsageError("no QA path given");
        engine->engine->load_qa(p);
    });
}

refrag_status refrag_engine_describe(const refrag_engine* engine, char** out_json) {
    return guarded([&] {
        require(engine, "engine");
        require(out_json, "out_json");
        *out_json = dup_string(refrag::describe(*engine->engine).dump());
    });
}

refrag_status refrag_engine_query(const refrag_engine* engine, const char* request_json, char** out_json) {
    return guarded([&] {
        require(engine, "engine");
        require(out_json, "out_json");
        const auto req = parse_request(request_json);
        const auto& eng = *engine->engine;
        const auto result = eng.query(require_question(req), eng.options_from_json(req));
        *out_json = dup_string(refrag::query_to_json(result, eng.store()).dump());
    });
}

refrag_status refrag_engine_retrieve(const refrag_engine* engine, const char* request_json, char** out_json) {
    return guarded([&] {
        require(engine, "engine");
        require(out_json, "out_json");
        const auto req = parse_request(request_json);
        const auto& eng = *engine->engine;
        const auto list = eng.retrieve(require_question(req), eng.options_from_json(req));
        *out_json = dup_string(json{{"retrieved", refrag::to_json(list)}}.dump());
    });
}

refrag_status refrag_engine_rerank(const refrag_engine* engine, const char* request_json, char** out_json) {
    return guarded([&] {
        require(engine, "engine");
        require(out_json, "out_json");
        const auto req = parse_request(request_json);
        const auto& eng = *engine->engine;
        const auto [retrieved, reranked] = eng.retrieve_and_rerank(require_question(req), eng.options_from_json(req));
        *out_json =
            dup_string(json{{"retrieved", refrag::to_json(retrieved)}, {"reranked", refrag::to_json(reranked)}}.dump());
    });
}

refrag_status refrag_engine_match(const refrag_engine* engine, const char* request_json, char** out_json) {
    return guarded([&] {
        require(engine, "engine");
        require(out_json, "out_json");
        const auto req = parse_request(request_json);
        const auto& eng = *engine->engine;
        const auto opts = eng.options_from_json(req);
        const auto sentences = refrag::require_string_list(req, "sentences", "request");
        std::vector<refrag::MatchChunk> chunks;
        if (auto it = req.find("chunks"); it != req.end()) {
            for (const auto& c : *it) {
                chunks.push_back({refrag::require_string(c, "id", "chunks"), refrag::require_string(c, "text", "chunks")});
            }
        } else {
            chunks = eng.resolve_chunks(refrag::require_string_list(req, "chunk_ids", "request"), opts.version);
        }
        *out_json = dup_string(refrag::to_json(eng.match(sentences, chunks, opts)).dump());
    });
}

refrag_status refrag_engine_export_pairs(const refrag_engine* engine, uint64_t seed, char** out_jsonl) {
    return guarded([&] {
        require(engine, "engine");
        require(out_jsonl, "out_jsonl");
        const auto pairs = engine->engine->export_pairs(seed);
        *out_jsonl = dup_string(refrag::to_jsonl(pairs));
    });
}

refrag_status refrag_engine_eval_retrieval(const refrag_engine* engine, const char* request_json, char** out_json) {
    return guarded([&] {
        require(engine, "engine");
        require(out_json, "out_json");
        const auto req = parse_request(request_json);
        const auto& eng = *engine->engine;
        if (eng.qa().empty()) throw refrag::UsageError("retrieval evaluation needs a loaded QA file");
        const auto ks = read_ks(req);
        const auto gold = eng.gold();

        std::map<std::string, std::vector<refrag::eval::RunEntry>> runs;
        json config_echo = json::object();
        if (auto it = req.find("runs"); it != req.end() && !it->empty()) {
            for (const auto& p : *it) {
                const auto path = p.get<std::string>();
                auto in = open(path);
                runs[std::filesystem::path(path).stem().string()] =
                    refrag::eval::parse_run(in, std::filesystem::path(path).filename().string());
            }
        } else {
            const auto opts = eng.options_from_json(req);
            auto split = refrag::Split::test;
            if (auto s = req.find("split"); s != req.end() && !s->is_null()) {
                auto parsed = refrag::parse_split(s->get<std::string>());
                if (!parsed) throw refrag::UsageError("split must be train, val or test");
                split = *parsed;
            }
            runs["retrieval"] = eng.run_stage(refrag::Stage::retrieval, split, opts);
            runs["reranking"] = eng.run_stage(refrag::Stage::reranking, split, opts);
            config_echo = {{"n", opts.n},
                           {"k", opts.k},
                           {"version", std::string(refrag::to_string(opts.version))},
                           {"split", std::string(refrag::to_string(split))},
                           {"retrieval_scorer", eng.retrieval_scorer().identity()},
                           {"rerank_scorer", eng.rerank_scorer().identity()}};
        }

        json reports = json::object();
        std::string text;
        for (const auto& [name, run] : runs) {
            auto report = refrag::eval::evaluate_run(run, gold, ks);
            report.config.update(config_echo);
            reports[name] = refrag::eval::to_json(report);
            text += "== " + name + " ==\n" + refrag::eval::render_table(report);
        }
        *out_json = dup_string(json{{"reports", reports}, {"text", text}}.dump());
    });
}

refrag_status refrag_engine_eval_match(const refrag_engine* engine, const char* request_json, char** out_json) {
    return guarded([&] {
        require(engine, "engine");
        require(out_json, "out_json");
        const auto req = parse_request(request_json);
        const auto& eng = *engine->engine;
        const auto opts = eng.options_from_json(req);
        const auto thresholds = read_thresholds(req);

        const auto annotations_path = refrag::require_string(req, "annotations", "request");
        auto ann_in = open(annotations_path);
        const auto annotations = refrag::eval::parse_annotations(
            ann_in, std::filesystem::path(annotations_path).filename().string());

        std::map<std::string, refrag::ReferenceAlignment> provided;
        if (auto it = req.find("alignments"); it != req.end() && !it->is_null()) {
            const auto path = it->get<std::string>();
            auto in = open(path);
            std::string line;
            std::size_t line_no = 0;
            while (std::getline(in, line)) {
                ++line_no;
                if (refrag::text::trim(line).empty()) continue;
                const auto where = std::filesystem::path(path).filename().string() + ":" + std::to_string(line_no);
                auto a = refrag::alignment_from_json(refrag::parse_record(line, where), where);
                provided[a.qid] = std::move(a);
            }
        }

        std::map<std::string, const refrag::QAPair*> questions;
        for (const auto& qa : eng.qa()) questions[qa.qid] = &qa;

        std::vector<refrag::eval::AnnotatedAlignment> items;
        for (const auto& ann : annotations) {
            if (!provided.empty()) {
                auto it = provided.find(ann.qid);
                if (it == provided.end()) throw refrag::DataError("no alignment for qid \"" + ann.qid + "\"");
                items.push_back({it->second, ann});
                continue;
            }
            auto q = questions.find(ann.qid);
            if (q == questions.end()) {
                throw refrag::DataError("annotation qid \"" + ann.qid + "\" is not in the QA file");
            }
            auto o = opts;
            o.qid = ann.qid;
            const auto reranked = eng.retrieve_and_rerank(q->second->question, o).second;
            const auto chunks = eng.resolve_chunks(reranked.ids(), o.version);
            items.push_back({eng.match(ann.sentences, chunks, o), ann});
        }

        json per_answer = json::array();
        double sum = 0.0;
        std::size_t with_data = 0;
        for (const auto& item : items) {
            const auto r = refrag::eval::sentence_precision(
                refrag::apply_threshold(item.alignment, opts.threshold), item.annotation);
            per_answer.push_back({{"qid", item.annotation.qid},
                                  {"precision", r.precision ? json(*r.precision) : json(nullptr)},
                                  {"matched", r.matched},
                                  {"counted", r.counted},
                                  {"segments", item.alignment.segments.size()}});
            if (r.precision) {
                sum += *r.precision;
                ++with_data;
            }
        }
        const auto curve = refrag::eval::precision_threshold_curve(items, thresholds);
        json summary{{"threshold", opts.threshold},
                     {"mode", std::string(refrag::to_string(opts.mode))},
                     {"answers", items.size()},
                     {"answers_without_data", items.size() - with_data},
                     {"precision", with_data ? json(sum / static_cast<double>(with_data)) : json(nullptr)}};
        std::ostringstream text;
        text << "sentence-level precision @ threshold " << opts.threshold << ": "
             << (with_data ? std::to_string(sum / static_cast<double>(with_data)) : std::string("n/a")) << " ("
             << with_data << " answers, " << items.size() - with_data << " without data)\n\n"
             << refrag::eval::render_curve_table(curve);
        *out_json = dup_string(json{{"summary", summary},
                                    {"per_answer", per_answer},
                                    {"curve", refrag::eval::to_json(curve)},
                                    {"csv", refrag::eval::render_curve_csv(curve)},
                                    {"text", text.str()}}
                                   .dump());
    });
}

refrag_status refrag_eval_judge(const char* judge_path, char** out_json) {
    return guarded([&] {
        require(judge_path, "judge_path");
        require(out_json, "out_json");
        auto in = open(judge_path);
        const auto records = refrag::eval::parse_judge(in, std::filesystem::path(judge_path).filename().string());
        const auto report = refrag::eval::judge_report(records);
        *out_json = dup_string(
            json{{"report", refrag::eval::to_json(report)}, {"text", refrag::eval::render_table(report)}}.dump());
    });
}

refrag_status refrag_serve(const char* config_path, const char* overrides_json) {
    return guarded([&] {
        auto cfg = refrag::load_config(config_path ? config_path : "", parse_request(overrides_json));
        if (cfg.corpus.empty()) throw refrag::UsageError("serve needs a corpus path");
        refrag::Service service(cfg);
        const int port = service.bind(cfg.listen);
        std::clog << "refrag: listening on " << cfg.listen.substr(0, cfg.listen.rfind(':')) << ":" << port << '\n';

        std::string load_error;
        refrag::ErrorKind load_kind = refrag::ErrorKind::data;
        std::thread loader([&] {
            try {
                auto engine = std::make_shared<refrag::Engine>(cfg);
                engine->load_corpus(cfg.corpus);
                if (!cfg.qa.empty()) engine->load_qa(cfg.qa);
                service.set_engine(std::move(engine));
                std::clog << "refrag: corpus loaded\n";
            } catch (const refrag::Error& e) {
                load_error = e.what();
                load_kind = e.kind();
                service.stop();
            } catch (const std::exception& e) {
                load_error = e.what();
                service.stop();
            }
        });
        service.run();
        loader.join();
        if (!load_error.empty()) throw refrag::Error(load_kind, load_error);
    });
}

}  // extern "C"
