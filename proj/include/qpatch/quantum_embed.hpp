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

// Patch-summary feature map and the fidelity kernel built on it.
//
// One layer on a 4-qubit block is
//     RX(q0, s1) RY(q1, s2) R_{s3_axis}(q2, s3) RY(q3, s4)
//     CZ(0,1) CZ(1,2) CZ(2,3)
// and the two-patch circuit runs two blocks side by side on q0..q3 and
// q4..q7 followed by CZ(3,4). The layer is repeated `depth` times with the
// same angles. Summary values are used as rotation angles without rescaling.

#pragma once

#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "qpatch/patch_features.hpp"
#include "qpatch/statevector.hpp"

namespace qpatch {

inline constexpr int kMaxDepth = 3;
inline constexpr int kQubitsPerPatch = 4;

struct EmbeddingConfig {
    int depth = 1;
    /// Rotation axis carrying the spectral-bandwidth angle. Z leaves q2 in
    /// |0> up to phase, so s3 has no effect on the kernel.
    Axis s3_axis = Axis::Z;
};

void validate(const EmbeddingConfig& config);

struct RotationGate {
    Axis axis = Axis::X;
    int qubit = 0;
    int angle_index = 0;  // index into the angle vector
};

struct CzGate {
    int a = 0;
    int b = 0;
};

using Gate = std::variant<RotationGate, CzGate>;

struct CircuitSpec {
    int n_qubits = 4;
    int depth = 1;
    std::vector<Gate> gates;  // all layers, in application order
};

/// Circuit for one (4 qubits) or two (8 qubits) patch summaries.
CircuitSpec build_circuit(int n_patches, const EmbeddingConfig& config = {});

/// Throws InputError unless depth is 1..3, qubits and angle indices are in
/// range, and every CZ pair is adjacent inside a block or the single (3,4)
/// bridge of the two-patch circuit.
void validate(const CircuitSpec& circuit, Index n_angles);

/// Runs `circuit` on |0...0>.
QState simulate(const CircuitSpec& circuit, std::span<const double> angles);

QState embed_patch(const Eigen::Vector4d& summary, const EmbeddingConfig& config = {});
QState embed_patch(const PatchSummary& summary, const EmbeddingConfig& config = {});

QState embed_pair(const Eigen::Vector4d& first, const Eigen::Vector4d& second,
                  const EmbeddingConfig& config = {});
QState embed_pair(const PatchSummary& first, const PatchSummary& second, const EmbeddingConfig& config = {});

/// Embedded form of a feature vector: one 4-qubit state for a single patch,
/// otherwise one 8-qubit state per consecutive patch pair.
struct EmbeddedFeatures {
    std::vector<QState> blocks;
};

/// Throws InputError unless the length is 4 or a positive multiple of 8.
void check_kernel_length(Index length);

EmbeddedFeatures embed_features(const VectorXd& x, const EmbeddingConfig& config = {});

/// Mean per-block fidelity between two embedded feature vectors.
double fidelity_kernel(const EmbeddedFeatures& x, const EmbeddedFeatures& y);

/// |<phi(x)|phi(y)>|^2, averaged over patch pairs when more than one pair.
double fidelity_kernel(const VectorXd& x, const VectorXd& y, const EmbeddingConfig& config = {});
double fidelity_kernel(const FeatureVector& x, const FeatureVector& y, const EmbeddingConfig& config = {});

/// Debug dump: header `index,real,imag`, one basis state per row.
void write_statevector_csv(const std::filesystem::path& path, const QState& state);

}  // namespace qpatch
