// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/json_io.hpp"

#include "refrag/error.hpp"

namespace refrag {

json to_json(const ChunkHeader& header) {
    json h = json::object();
    if (header.test_name) h["test_name"] = *header.test_name;
    if (header.region) h["region"] = *header.region;
    if (header.state) h["state"] = *header.state;
    if (header.purpose) h["purpose"] = *header.purpose;
    return h;
}

json to_json(const Chunk& chunk) {
    return json{
        {"id", chunk.id},
        {"source", std::string(to_string(chunk.source))},
        {"header", chunk.header ? to_json(*chunk.header) : json(nullptr)},
        {"body", chunk.body},
        {"split", std::string(to_string(chunk.split))},
    };
}

json to_json(const RankedList& list) {
    json out = json::array();
    for (const auto& e : list.entries) out.push_back({{"chunk_id", e.chunk_id}, {"score", e.score}});
    return out;
}

json to_json(const Segment& segment) {
    return json{{"start", segment.start},
                {"end", segment.end},
                {"chunk_ids", segment.chunk_ids},
                {"score", segment.score},
                {"referenced", segment.referenced}};
}

json to_json(const ReferenceAlignment& alignment) {
    json segments = json::array();
    for (const auto& s : alignment.segments) segments.push_back(to_json(s));
    return json{{"qid", alignment.qid},
                {"mode", std::string(to_string(alignment.mode))},
                {"threshold", alignment.threshold},
                {"segments", segments}};
}

ReferenceAlignment alignment_from_json(const json& obj, const std::string& where) {
    ReferenceAlignment a;
    a.qid = require_string(obj, "qid", where);
    auto mode = parse_match_mode(require_string(obj, "mode", where));
    if (!mode) throw DataError(where + ": field 'mode' has unknown value");
    a.mode = *mode;
    const auto& threshold = require_field(obj, "threshold", where);
    if (!threshold.is_number()) throw DataError(where + ": field 'threshold' must be a number");
    a.threshold = threshold.get<double>();
    const auto& segments = require_field(obj, "segments", where);
    if (!segments.is_array()) throw DataError(where + ": field 'segments' must be an array");
    for (const auto& s : segments) {
        if (!s.is_object()) throw DataError(where + ": segment must be an object");
        Segment seg;
        const auto& start = require_field(s, "start", where);
        const auto& end = require_field(s, "end", where);
        const auto& score = require_field(s, "score", where);
        const auto& referenced = require_field(s, "referenced", where);
        if (!start.is_number_unsigned() || !end.is_number_unsigned() || !score.is_number() ||
            !referenced.is_boolean()) {
            throw DataError(where + ": segment fields have wrong types");
        }
        seg.start = start.get<std::size_t>();
        seg.end = end.get<std::size_t>();
        seg.score = score.get<double>();
        seg.referenced = referenced.get<bool>();
        seg.chunk_ids = require_string_list(s, "chunk_ids", where);
        if (seg.chunk_ids.empty()) throw DataError(where + ": segment has no chunk ids");
        a.segments.push_back(std::move(seg));
    }
    if (a.segments.empty()) throw DataError(where + ": alignment has no segments");
    try {
        check_partition(a.segments, a.sentence_count());
    } catch (const std::logic_error& e) {
        throw DataError(where + ": " + e.what());
    }
    return a;
}

const json& require_field(const json& obj, const char* field, const std::string& where) {
    auto it = obj.find(field);
    if (it == obj.end()) throw DataError(where + ": missing field '" + field + "'");
    return *it;
}

std::string require_string(const json& obj, const char* field, const std::string& where) {
    const auto& v = require_field(obj, field, where);
    if (!v.is_string()) throw DataError(where + ": field '" + field + "' must be a string");
    return v.get<std::string>();
}

std::vector<std::string> require_string_list(const json& obj, const char* field,
                                             const std::string& where) {
    const auto& v = require_field(obj, field, where);
    if (!v.is_array()) throw DataError(where + ": field '" + field + "' must be an array of strings");
    std::vector<std::string> out;
    out.reserve(v.size());
    for (const auto& item : v) {
        if (!item.is_string()) {
            throw DataError(where + ": field '" + field + "' must be an array of strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

json parse_record(const std::string& line, const std::string& where) {
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::parse_error& e) {
        throw DataError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!rec.is_object()) throw DataError(where + ": record must be a JSON object");
    return rec;
}

}  // namespace refrag
