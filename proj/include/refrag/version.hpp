// Copyright 2026 The refrag Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace refrag {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace refrag
