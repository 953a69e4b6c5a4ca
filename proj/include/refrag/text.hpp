// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace refrag::text {

/// Lowercases (Unicode simple case mapping) and splits on every maximal run of
/// non-alphanumeric code points. Invalid UTF-8 bytes act as separators.
std::vector<std::string> tokenize(std::string_view input);

/// Sorted, de-duplicated tokens of `input`.
std::vector<std::string> token_set(std::string_view input);

/// Splits after '.', '!', '?' or U+3002 when followed by whitespace or end of
/// text. Pieces are trimmed; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view input);

using SentenceSplitter = std::function<std::vector<std::string>(std::string_view)>;

std::string trim(std::string_view s);

/// Joins sentences[first..last] (0-based, inclusive) with single spaces.
std::string join_range(std::span<const std::string> sentences, std::size_t first, std::size_t last);

bool contains_line_break(std::string_view s);

}  // namespace refrag::text
