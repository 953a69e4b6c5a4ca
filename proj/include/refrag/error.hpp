// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace refrag {

/// Coarse error classes. The numeric values double as CLI exit codes and
/// C API status codes (see refrag.h).
enum class ErrorKind {
    usage = 1,    // bad arguments / violated preconditions
    data = 2,     // malformed or inconsistent input data
    backend = 3,  // remote scorer/generator unavailable or misbehaving
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Remote backend failure. `backend` names the component (e.g. "rerank scorer").
class BackendError : public Error {
public:
    BackendError(std::string backend, const std::string& what)
        : Error(ErrorKind::backend, what), backend_(std::move(backend)) {}
    const std::string& backend() const noexcept { return backend_; }

private:
    std::string backend_;
};

/// The backend answered, but not in the agreed wire format.
class ProtocolError : public BackendError {
public:
    using BackendError::BackendError;
};

/// Raised from Scorer::score_batch; carries the index of the first pair that
/// could not be scored so callers can attach their own coordinates.
/// `backend` is set when a remote component failed.
class ScoringError : public Error {
public:
    ScoringError(ErrorKind kind, std::size_t pair_index, const std::string& what, std::string backend = {})
        : Error(kind, what), pair_index_(pair_index), backend_(std::move(backend)) {}
    std::size_t pair_index() const noexcept { return pair_index_; }
    const std::string& backend() const noexcept { return backend_; }

    /// Re-raises with `context` prefixed, keeping the kind and backend name.
    [[noreturn]] void rethrow_with(const std::string& context) const {
        const std::string message = context + ": " + what();
        if (!backend_.empty()) throw BackendError(backend_, message);
        throw Error(kind(), message);
    }

private:
    std::size_t pair_index_;
    std::string backend_;
};

}  // namespace refrag
