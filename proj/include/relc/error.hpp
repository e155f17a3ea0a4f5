// Copyright (c) 2026 relcomplete authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace relc {

/// Malformed or unreadable input data (bad file contents, non-finite values).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure (missing file, short read, failed write).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad run configuration (unknown key, invalid value, violated schedule invariant).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss or gradient.
struct DivergedError : std::runtime_error {
  explicit DivergedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace relc
