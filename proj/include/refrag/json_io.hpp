// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON conversions for the record types that cross file and wire boundaries.

#include <json.hpp>

#include "refrag/corpus.hpp"
#include "refrag/pipeline.hpp"
#include "refrag/refmatch.hpp"

namespace refrag {

using json = nlohmann::json;

json to_json(const Chunk& chunk);
json to_json(const ChunkHeader& header);

/// `[{"chunk_id": ..., "score": ...}, ...]`
json to_json(const RankedList& list);

/// `{"qid", "mode", "threshold", "segments": [{"start", "end", "chunk_ids", "score", "referenced"}]}`
json to_json(const ReferenceAlignment& alignment);
json to_json(const Segment& segment);
ReferenceAlignment alignment_from_json(const json& obj, const std::string& where);

/// Field helpers used by the line-oriented readers. They throw DataError
/// naming `where` (e.g. "corpus.jsonl:4") and the offending field.
const json& require_field(const json& obj, const char* field, const std::string& where);
std::string require_string(const json& obj, const char* field, const std::string& where);
std::vector<std::string> require_string_list(const json& obj, const char* field, const std::string& where);

/// Parses one JSONL line into an object; DataError on malformed JSON or
/// non-object values.
json parse_record(const std::string& line, const std::string& where);

}  // namespace refrag
