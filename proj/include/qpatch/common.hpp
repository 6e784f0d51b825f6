// Copyright 2026 The Q-Patch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qpatch {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Numerical-stability constant shared by log compression, standardization,
/// patch weights and the coherence denominator.
inline constexpr double kEpsilon = 1e-8;

/// Bad input or configuration supplied by the caller. The CLI maps this to
/// exit code 2; everything else deriving from std::exception maps to 1.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Writes a single warning line to stderr, prefixed with "qpatch: warning: ".
void log_warning(std::string_view message);

/// Writes an informational line to stderr unless quiet mode is on.
void log_info(std::string_view message);

/// Silences log_info (warnings are always emitted).
void set_quiet(bool quiet);

/// Worker count for parallel stages: hardware concurrency, capped by the
/// QPATCH_THREADS environment variable when set to a positive integer.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// processed exactly once; the first exception thrown by any worker is
/// rethrown on the calling thread after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Stable 64-bit FNV-1a digest, used for provenance hashes and file ids.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Lower-case 16-digit hexadecimal rendering of a 64-bit value.
std::string hex64(std::uint64_t value);

}  // namespace qpatch
