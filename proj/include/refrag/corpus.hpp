// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace refrag {

enum class Source { test_report, meeting_note, textbook };
enum class Split { train, val, test };

/// Chunk text rendering: ver0 is the raw body, ver1 prepends the summary header.
enum class TextVersion { ver0, ver1 };

std::string_view to_string(Source s);
std::string_view to_string(Split s);
std::string_view to_string(TextVersion v);
std::optional<Source> parse_source(std::string_view s);
std::optional<Split> parse_split(std::string_view s);
std::optional<TextVersion> parse_text_version(std::string_view s);

struct ChunkHeader {
    std::optional<std::string> test_name;
    std::optional<std::string> region;
    std::optional<std::string> state;
    std::optional<std::string> purpose;

    bool empty() const { return !test_name && !region && !state && !purpose; }
    bool operator==(const ChunkHeader&) const = default;
};

struct Chunk {
    std::string id;
    Source source = Source::test_report;
    std::optional<ChunkHeader> header;
    std::string body;
    Split split = Split::train;

    bool operator==(const Chunk&) const = default;
};

struct QAPair {
    std::string qid;
    std::string question;
    /// Gold answer. A plain-text answer is stored as a single element with
    /// `answer_presplit == false`.
    std::vector<std::string> answer;
    bool answer_presplit = false;
    std::vector<std::string> gold_chunk_ids;
    Split split = Split::train;
};

/// Read-only chunk collection, iterated in ascending id order.
class ChunkStore {
public:
    using const_iterator = std::vector<Chunk>::const_iterator;

    ChunkStore() = default;

    /// Validates every chunk and seals the store. Throws DataError on
    /// duplicate ids, empty bodies or invalid headers.
    static ChunkStore from_chunks(std::vector<Chunk> chunks);

    const Chunk* find(std::string_view id) const;
    /// Throws DataError for unknown ids.
    const Chunk& at(std::string_view id) const;

    std::size_t size() const { return chunks_.size(); }
    bool empty() const { return chunks_.empty(); }
    const_iterator begin() const { return chunks_.begin(); }
    const_iterator end() const { return chunks_.end(); }

    std::map<Source, std::size_t> count_by_source() const;
    std::map<Split, std::size_t> count_by_split() const;

private:
    std::vector<Chunk> chunks_;
};

/// Reads one JSON chunk record per line. `origin` names the input in errors.
ChunkStore parse_corpus(std::istream& in, const std::string& origin);
ChunkStore ingest_corpus(const std::filesystem::path& path);

std::vector<QAPair> parse_qa(std::istream& in, const std::string& origin, const ChunkStore& store);
std::vector<QAPair> ingest_qa(const std::filesystem::path& path, const ChunkStore& store);

std::map<Split, std::size_t> count_by_split(const std::vector<QAPair>& pairs);

/// Header block template: one `## <Label>: <value>` line per present field in
/// the order Test Name, Region, State, Purpose, then a blank line, then body.
std::string render_chunk_text(const Chunk& chunk, TextVersion version);

/// Canonical JSON-lines form of the store (one record per line, id order).
std::string serialize_store(const ChunkStore& store);

}  // namespace refrag
