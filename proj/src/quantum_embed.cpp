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

#include "qpatch/quantum_embed.hpp"

#include <algorithm>
#include <cstdlib>

#include "qpatch/csv_io.hpp"

namespace qpatch {

void validate(const EmbeddingConfig& config) {
    if (config.depth < 1 || config.depth > kMaxDepth) {
        throw InputError("circuit depth must be in 1.." + std::to_string(kMaxDepth) + ", got " +
                         std::to_string(config.depth));
    }
}

CircuitSpec build_circuit(int n_patches, const EmbeddingConfig& config) {
    validate(config);
    if (n_patches != 1 && n_patches != 2) throw InputError("embedding circuit takes one or two patches");
    CircuitSpec c;
    c.n_qubits = kQubitsPerPatch * n_patches;
    c.depth = config.depth;
    const Axis axes[kQubitsPerPatch] = {Axis::X, Axis::Y, config.s3_axis, Axis::Y};
    for (int layer = 0; layer < config.depth; ++layer) {
        for (int p = 0; p < n_patches; ++p) {
            for (int q = 0; q < kQubitsPerPatch; ++q) {
                const int idx = p * kQubitsPerPatch + q;
                c.gates.emplace_back(RotationGate{axes[q], idx, idx});
            }
        }
        for (int p = 0; p < n_patches; ++p) {
            const int base = p * kQubitsPerPatch;
            for (int q = 0; q + 1 < kQubitsPerPatch; ++q) c.gates.emplace_back(CzGate{base + q, base + q + 1});
        }
        if (n_patches == 2) c.gates.emplace_back(CzGate{kQubitsPerPatch - 1, kQubitsPerPatch});
    }
    return c;
}

void validate(const CircuitSpec& circuit, Index n_angles) {
    if (circuit.depth < 1 || circuit.depth > kMaxDepth) throw InputError("circuit depth must be in 1..3");
    if (circuit.n_qubits != kQubitsPerPatch && circuit.n_qubits != 2 * kQubitsPerPatch) {
        throw InputError("embedding circuits have 4 or 8 qubits");
    }
    for (const Gate& g : circuit.gates) {
        if (const auto* r = std::get_if<RotationGate>(&g)) {
            if (r->qubit < 0 || r->qubit >= circuit.n_qubits) throw InputError("rotation qubit out of range");
            if (r->angle_index < 0 || r->angle_index >= n_angles) throw InputError("rotation angle index out of range");
        } else {
            const auto& cz = std::get<CzGate>(g);
            if (cz.a < 0 || cz.b < 0 || cz.a >= circuit.n_qubits || cz.b >= circuit.n_qubits) {
                throw InputError("CZ qubit out of range");
            }
            if (std::abs(cz.a - cz.b) != 1) throw InputError("CZ pairs must be adjacent qubits");
            const bool crosses_block = cz.a / kQubitsPerPatch != cz.b / kQubitsPerPatch;
            const bool is_bridge = std::min(cz.a, cz.b) == kQubitsPerPatch - 1;
            if (crosses_block && !is_bridge) throw InputError("only CZ(3,4) may link patch blocks");
        }
    }
}

QState simulate(const CircuitSpec& circuit, std::span<const double> angles) {
    validate(circuit, static_cast<Index>(angles.size()));
    QState state = QState::zero_state(circuit.n_qubits);
    for (const Gate& g : circuit.gates) {
        if (const auto* r = std::get_if<RotationGate>(&g)) {
            state.rotate(r->axis, r->qubit, angles[static_cast<std::size_t>(r->angle_index)]);
        } else {
            const auto& cz = std::get<CzGate>(g);
            state.cz(cz.a, cz.b);
        }
    }
    return state;
}

QState embed_patch(const Eigen::Vector4d& summary, const EmbeddingConfig& config) {
    return simulate(build_circuit(1, config), std::span<const double>(summary.data(), 4));
}

QState embed_patch(const PatchSummary& summary, const EmbeddingConfig& config) {
    return embed_patch(summary.vector(), config);
}

QState embed_pair(const Eigen::Vector4d& first, const Eigen::Vector4d& second, const EmbeddingConfig& config) {
    Eigen::Matrix<double, 8, 1> angles;
    angles << first, second;
    return simulate(build_circuit(2, config), std::span<const double>(angles.data(), 8));
}

QState embed_pair(const PatchSummary& first, const PatchSummary& second, const EmbeddingConfig& config) {
    return embed_pair(first.vector(), second.vector(), config);
}

void check_kernel_length(Index length) {
    if (length == kQubitsPerPatch) return;
    if (length > 0 && length % (2 * kQubitsPerPatch) == 0) return;
    throw InputError("fidelity kernel needs a single patch (4 values) or whole patch pairs "
                     "(a multiple of 8 values), got length " + std::to_string(length));
}

EmbeddedFeatures embed_features(const VectorXd& x, const EmbeddingConfig& config) {
    check_kernel_length(x.size());
    EmbeddedFeatures e;
    if (x.size() == kQubitsPerPatch) {
        e.blocks.push_back(embed_patch(Eigen::Vector4d(x.head<4>()), config));
        return e;
    }
    const CircuitSpec pair_circuit = build_circuit(2, config);
    for (Index off = 0; off < x.size(); off += 2 * kQubitsPerPatch) {
        e.blocks.push_back(simulate(pair_circuit, std::span<const double>(x.data() + off, 8)));
    }
    return e;
}

double fidelity_kernel(const EmbeddedFeatures& x, const EmbeddedFeatures& y) {
    if (x.blocks.size() != y.blocks.size() || x.blocks.empty()) {
        throw InputError("fidelity kernel inputs have different lengths");
    }
    double sum = 0.0;
    for (std::size_t b = 0; b < x.blocks.size(); ++b) sum += fidelity(x.blocks[b], y.blocks[b]);
    return sum / static_cast<double>(x.blocks.size());
}

double fidelity_kernel(const VectorXd& x, const VectorXd& y, const EmbeddingConfig& config) {
    if (x.size() != y.size()) {
        throw InputError("fidelity kernel inputs have different lengths (" + std::to_string(x.size()) +
                         " vs " + std::to_string(y.size()) + ")");
    }
    return fidelity_kernel(embed_features(x, config), embed_features(y, config));
}

double fidelity_kernel(const FeatureVector& x, const FeatureVector& y, const EmbeddingConfig& config) {
    return fidelity_kernel(x.values, y.values, config);
}

void write_statevector_csv(const std::filesystem::path& path, const QState& state) {
    CsvTable t;
    t.header = {"index", "real", "imag"};
    for (Index i = 0; i < state.dimension(); ++i) {
        const auto a = state.amplitudes()[i];
        t.rows.push_back({std::to_string(i), format_double(a.real()), format_double(a.imag())});
    }
    write_csv(path, t);
}

}  // namespace qpatch
