// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "refrag/error.hpp"
#include "refrag/json_io.hpp"
#include "refrag/text.hpp"

namespace refrag {

namespace {

struct HeaderField {
    const char* key;
    const char* label;
    std::optional<std::string> ChunkHeader::*member;
};

constexpr std::array<HeaderField, 4> kHeaderFields{{
    {"test_name", "Test Name", &ChunkHeader::test_name},
    {"region", "Region", &ChunkHeader::region},
    {"state", "State", &ChunkHeader::state},
    {"purpose", "Purpose", &ChunkHeader::purpose},
}};

void validate_chunk(const Chunk& c, const std::string& where) {
    if (c.id.empty()) throw DataError(where + ": field 'id' must be non-empty");
    if (text::trim(c.body).empty()) {
        throw DataError(where + ": field 'body' is empty for chunk \"" + c.id + "\"");
    }
    if (c.header) {
        if (c.header->empty()) {
            throw DataError(where + ": field 'header' has no fields for chunk \"" + c.id + "\"");
        }
        for (const auto& f : kHeaderFields) {
            const auto& value = (*c.header).*(f.member);
            if (!value) continue;
            if (value->empty()) {
                throw DataError(where + ": field 'header." + f.key + "' is empty");
            }
            if (text::contains_line_break(*value)) {
                throw DataError(where + ": field 'header." + f.key + "' contains a line break");
            }
        }
    }
}

Chunk parse_chunk(const json& rec, const std::string& where) {
    Chunk c;
    c.id = require_string(rec, "id", where);
    auto source = parse_source(require_string(rec, "source", where));
    if (!source) throw DataError(where + ": field 'source' has unknown value");
    c.source = *source;

    if (auto it = rec.find("header"); it != rec.end() && !it->is_null()) {
        if (!it->is_object()) throw DataError(where + ": field 'header' must be an object or null");
        ChunkHeader h;
        for (const auto& [key, v] : it->items()) {
            const bool known = std::any_of(kHeaderFields.begin(), kHeaderFields.end(),
                                           [&](const auto& f) { return key == f.key; });
            if (!known) throw DataError(where + ": field 'header." + key + "' is not a header field");
        }
        for (const auto& f : kHeaderFields) {
            auto fit = it->find(f.key);
            if (fit == it->end() || fit->is_null()) continue;
            if (!fit->is_string()) {
                throw DataError(where + ": field 'header." + f.key + "' must be a string");
            }
            h.*(f.member) = fit->get<std::string>();
        }
        c.header = std::move(h);
    }

    c.body = require_string(rec, "body", where);
    auto split = parse_split(require_string(rec, "split", where));
    if (!split) throw DataError(where + ": field 'split' has unknown value");
    c.split = *split;
    validate_chunk(c, where);
    return c;
}

template <typename Fn>
void for_each_record(std::istream& in, const std::string& origin, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        fn(parse_record(line, where), where);
    }
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

}  // namespace

std::string_view to_string(Source s) {
    switch (s) {
        case Source::test_report: return "test_report";
        case Source::meeting_note: return "meeting_note";
        case Source::textbook: return "textbook";
    }
    return "?";
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

std::string_view to_string(TextVersion v) { return v == TextVersion::ver0 ? "ver0" : "ver1"; }

std::optional<Source> parse_source(std::string_view s) {
    if (s == "test_report") return Source::test_report;
    if (s == "meeting_note") return Source::meeting_note;
    if (s == "textbook") return Source::textbook;
    return std::nullopt;
}

std::optional<Split> parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    return std::nullopt;
}

std::optional<TextVersion> parse_text_version(std::string_view s) {
    if (s == "ver0") return TextVersion::ver0;
    if (s == "ver1") return TextVersion::ver1;
    return std::nullopt;
}

ChunkStore ChunkStore::from_chunks(std::vector<Chunk> chunks) {
    std::set<std::string> seen;
    for (const auto& c : chunks) {
        validate_chunk(c, "chunk \"" + c.id + "\"");
        if (!seen.insert(c.id).second) throw DataError("duplicate chunk id \"" + c.id + "\"");
    }
    std::sort(chunks.begin(), chunks.end(),
              [](const Chunk& a, const Chunk& b) { return a.id < b.id; });
    ChunkStore store;
    store.chunks_ = std::move(chunks);
    return store;
}

const Chunk* ChunkStore::find(std::string_view id) const {
    auto it = std::lower_bound(chunks_.begin(), chunks_.end(), id,
                               [](const Chunk& c, std::string_view key) { return c.id < key; });
    if (it == chunks_.end() || it->id != id) return nullptr;
    return &*it;
}

const Chunk& ChunkStore::at(std::string_view id) const {
    if (const auto* c = find(id)) return *c;
    throw DataError("unknown chunk id \"" + std::string(id) + "\"");
}

std::map<Source, std::size_t> ChunkStore::count_by_source() const {
    std::map<Source, std::size_t> counts;
    for (const auto& c : chunks_) ++counts[c.source];
    return counts;
}

std::map<Split, std::size_t> ChunkStore::count_by_split() const {
    std::map<Split, std::size_t> counts;
    for (const auto& c : chunks_) ++counts[c.split];
    return counts;
}

ChunkStore parse_corpus(std::istream& in, const std::string& origin) {
    std::vector<Chunk> chunks;
    std::map<std::string, std::string> first_seen;
    for_each_record(in, origin, [&](const json& rec, const std::string& where) {
        Chunk c = parse_chunk(rec, where);
        if (auto [it, inserted] = first_seen.emplace(c.id, where); !inserted) {
            throw DataError(where + ": duplicate chunk id \"" + c.id + "\" (first seen at " +
                            it->second + ")");
        }
        chunks.push_back(std::move(c));
    });
    return ChunkStore::from_chunks(std::move(chunks));
}

ChunkStore ingest_corpus(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_corpus(in, path.filename().string());
}

std::vector<QAPair> parse_qa(std::istream& in, const std::string& origin, const ChunkStore& store) {
    std::vector<QAPair> pairs;
    std::set<std::string> qids;
    for_each_record(in, origin, [&](const json& rec, const std::string& where) {
        QAPair qa;
        qa.qid = require_string(rec, "qid", where);
        if (qa.qid.empty()) throw DataError(where + ": field 'qid' must be non-empty");
        if (!qids.insert(qa.qid).second) {
            throw DataError(where + ": duplicate qid \"" + qa.qid + "\"");
        }
        qa.question = require_string(rec, "question", where);
        const auto& answer = require_field(rec, "answer", where);
        if (answer.is_string()) {
            qa.answer = {answer.get<std::string>()};
        } else {
            qa.answer = require_string_list(rec, "answer", where);
            qa.answer_presplit = true;
        }
        qa.gold_chunk_ids = require_string_list(rec, "gold_chunk_ids", where);
        if (qa.gold_chunk_ids.empty()) {
            throw DataError(where + ": field 'gold_chunk_ids' is empty for qid \"" + qa.qid + "\"");
        }
        for (const auto& id : qa.gold_chunk_ids) {
            if (!store.find(id)) {
                throw DataError(where + ": qid \"" + qa.qid + "\" references unknown chunk id \"" +
                                id + "\"");
            }
        }
        auto split = parse_split(require_string(rec, "split", where));
        if (!split) throw DataError(where + ": field 'split' has unknown value");
        qa.split = *split;
        pairs.push_back(std::move(qa));
    });
    return pairs;
}

std::vector<QAPair> ingest_qa(const std::filesystem::path& path, const ChunkStore& store) {
    auto in = open_input(path);
    return parse_qa(in, path.filename().string(), store);
}

std::map<Split, std::size_t> count_by_split(const std::vector<QAPair>& pairs) {
    std::map<Split, std::size_t> counts;
    for (const auto& p : pairs) ++counts[p.split];
    return counts;
}

std::string render_chunk_text(const Chunk& chunk, TextVersion version) {
    if (version == TextVersion::ver0 || !chunk.header || chunk.header->empty()) return chunk.body;
    std::string out;
    for (const auto& f : kHeaderFields) {
        const auto& value = (*chunk.header).*(f.member);
        if (!value) continue;
        out += "## ";
        out += f.label;
        out += ": ";
        out += *value;
        out += '\n';
    }
    out += '\n';
    out += chunk.body;
    return out;
}

std::string serialize_store(const ChunkStore& store) {
    std::string out;
    for (const auto& c : store) {
        out += to_json(c).dump();
        out += '\n';
    }
    return out;
}

}  // namespace refrag
