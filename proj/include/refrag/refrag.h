/*
 * Copyright 2026 The refrag Authors
 * SPDX-License-Identifier: Apache-2.0
 */

/*
 * refrag C API.
 *
 * An engine handle owns a sealed chunk store, optional QA pairs and the
 * scorer/generator backends chosen by its configuration. Requests and
 * results are UTF-8 JSON strings. Every function returns a refrag_status;
 * on failure refrag_last_error() describes what went wrong (per thread).
 * Strings returned through `char** out` must be released with
 * refrag_free_string().
 *
 * Status codes equal the CLI exit codes.
 */

#ifndef REFRAG_H
#define REFRAG_H

#include <stdint.h>

#if defined(_WIN32)
#define REFRAG_API __declspec(dllexport)
#else
#define REFRAG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum refrag_status {
    REFRAG_OK = 0,
    REFRAG_ERR_USAGE = 1,   /* bad arguments or request */
    REFRAG_ERR_DATA = 2,    /* malformed or inconsistent input files */
    REFRAG_ERR_BACKEND = 3, /* remote scorer/generator failure */
    REFRAG_ERR_INTERNAL = 4
} refrag_status;

typedef struct refrag_engine refrag_engine;

REFRAG_API const char* refrag_version(void);
REFRAG_API const char* refrag_last_error(void);
REFRAG_API const char* refrag_status_name(refrag_status status);
REFRAG_API void refrag_free_string(char* s);

/*
 * config_path: optional key = value file (NULL or "" for none).
 * overrides_json: optional JSON object of config keys (NULL for none).
 * REFRAG_* environment variables apply between the two.
 */
REFRAG_API refrag_status refrag_engine_create(const char* config_path, const char* overrides_json,
                                              refrag_engine** out);
REFRAG_API void refrag_engine_destroy(refrag_engine* engine);

/* NULL path: use the configured `corpus` / `qa` path. */
REFRAG_API refrag_status refrag_engine_load_corpus(refrag_engine* engine, const char* path);
REFRAG_API refrag_status refrag_engine_load_qa(refrag_engine* engine, const char* path);

/* {"chunks": n, "by_source": {...}, "by_split": {...}, "qa_pairs"?: n, "qa_by_split"?: {...}} */
REFRAG_API refrag_status refrag_engine_describe(const refrag_engine* engine, char** out_json);

/* {"question": str, "n"?, "k"?, "threshold"?, "tie_epsilon"?, "mode"?, "version"?, "qid"?} */
REFRAG_API refrag_status refrag_engine_query(const refrag_engine* engine, const char* request_json,
                                             char** out_json);
/* Same request; returns {"retrieved": [...]} */
REFRAG_API refrag_status refrag_engine_retrieve(const refrag_engine* engine, const char* request_json,
                                                char** out_json);
/* Same request; returns {"retrieved": [...], "reranked": [...]} */
REFRAG_API refrag_status refrag_engine_rerank(const refrag_engine* engine, const char* request_json,
                                              char** out_json);

/*
 * {"sentences": [str], "chunk_ids": [str] | "chunks": [{"id","text"}],
 *  "threshold"?, "tie_epsilon"?, "mode"?, "qid"?}
 * Returns the alignment object.
 */
REFRAG_API refrag_status refrag_engine_match(const refrag_engine* engine, const char* request_json,
                                             char** out_json);

/* Training pairs as JSON lines. */
REFRAG_API refrag_status refrag_engine_export_pairs(const refrag_engine* engine, uint64_t seed,
                                                    char** out_jsonl);

/*
 * {"runs"?: [path], "ks"?: [int], "split"?: str, "n"?, "k"?, "version"?}
 * Without runs, the loaded QA split is run through retrieval and re-ranking.
 * Returns {"reports": {name: report}, "text": str}.
 */
REFRAG_API refrag_status refrag_engine_eval_retrieval(const refrag_engine* engine, const char* request_json,
                                                      char** out_json);

/*
 * {"annotations": path, "alignments"?: path, "thresholds"?: [num], ...query options}
 * Without alignments, each annotated answer is matched against the re-ranked
 * chunks of its QA question. Returns {"curve", "per_answer", "csv", "text"}.
 */
REFRAG_API refrag_status refrag_engine_eval_match(const refrag_engine* engine, const char* request_json,
                                                  char** out_json);

/* Judge file aggregation; needs no engine. Returns {"report", "text"}. */
REFRAG_API refrag_status refrag_eval_judge(const char* judge_path, char** out_json);

/*
 * Starts the HTTP service and blocks. The listener comes up before the
 * corpus is loaded, so /v1/health answers 503 until the store is sealed.
 */
REFRAG_API refrag_status refrag_serve(const char* config_path, const char* overrides_json);

#ifdef __cplusplus
}
#endif

#endif /* REFRAG_H */
