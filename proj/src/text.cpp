// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "refrag/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cstdint>

namespace refrag::text {

namespace {

void append_utf8(std::string& out, UChar32 c) {
    char buf[U8_MAX_LENGTH];
    int32_t len = 0;
    U8_APPEND_UNSAFE(buf, len, c);
    out.append(buf, static_cast<std::size_t>(len));
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

constexpr std::string_view kIdeographicFullStop = "\xE3\x80\x82";  // U+3002

}  // namespace

std::vector<std::string> tokenize(std::string_view input) {
    std::vector<std::string> tokens;
    std::string current;
    const auto* bytes = reinterpret_cast<const uint8_t*>(input.data());
    const auto length = static_cast<int32_t>(input.size());
    int32_t pos = 0;
    while (pos < length) {
        UChar32 c;
        U8_NEXT(bytes, pos, length, c);
        if (c >= 0 && u_isalnum(c)) {
            append_utf8(current, u_tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> token_set(std::string_view input) {
    auto tokens = tokenize(input);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    return tokens;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_sentences(std::string_view input) {
    std::vector<std::string> out;
    std::size_t start = 0;
    std::size_t i = 0;
    auto emit = [&](std::size_t end) {
        auto piece = trim(input.substr(start, end - start));
        if (!piece.empty()) out.push_back(std::move(piece));
        start = end;
    };
    while (i < input.size()) {
        std::size_t term_len = 0;
        char c = input[i];
        if (c == '.' || c == '!' || c == '?') {
            term_len = 1;
        } else if (input.substr(i, kIdeographicFullStop.size()) == kIdeographicFullStop) {
            term_len = kIdeographicFullStop.size();
        }
        if (term_len > 0) {
            std::size_t after = i + term_len;
            if (after == input.size() || is_space(input[after])) {
                emit(after);
            }
            i = after;
        } else {
            ++i;
        }
    }
    if (start < input.size()) emit(input.size());
    return out;
}

std::string join_range(std::span<const std::string> sentences, std::size_t first, std::size_t last) {
    std::string out;
    for (std::size_t i = first; i <= last; ++i) {
        if (i != first) out.push_back(' ');
        out += sentences[i];
    }
    return out;
}

bool contains_line_break(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '\n' || c == '\r' || c == '\v' || c == '\f') return true;
        // U+0085, U+2028, U+2029
        if (s.substr(i, 2) == "\xC2\x85" || s.substr(i, 3) == "\xE2\x80\xA8" ||
            s.substr(i, 3) == "\xE2\x80\xA9") {
            return true;
        }
    }
    return false;
}

}  // namespace refrag::text
