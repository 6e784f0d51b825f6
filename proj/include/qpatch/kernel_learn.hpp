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

// Precomputed-kernel support vector machine: Gram matrices for the fidelity
// and RBF kernels, a soft-margin SMO solver, and decision scores.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpatch/quantum_embed.hpp"

namespace qpatch {

enum class KernelKind { Quantum, Rbf };

std::string to_string(KernelKind kind);
KernelKind parse_kernel_kind(const std::string& s);

struct KernelSpec {
    KernelKind kind = KernelKind::Quantum;
    EmbeddingConfig embedding;  // quantum only
    double gamma = 1.0;         // rbf only

    nlohmann::json to_json() const;
};

struct GramMatrix {
    MatrixXd values;
    KernelKind kind = KernelKind::Quantum;
    std::string config_hash;  // digest of the features and kernel parameters
};

double rbf_kernel(const VectorXd& x, const VectorXd& y, double gamma);

/// The "scale" heuristic: 1 / (dim * var(all feature entries)); 1 / dim when
/// the variance is zero.
double rbf_gamma_scale(std::span<const VectorXd> features);

/// Stacks feature vectors as matrix rows; throws InputError when ragged.
MatrixXd stack_features(std::span<const VectorXd> features);

std::string feature_hash(std::span<const VectorXd> features, const KernelSpec& spec);

/// K_ij = kappa(x_i, x_j) for i <= j, mirrored. Parallel over rows.
GramMatrix build_gram(std::span<const VectorXd> features, const KernelSpec& spec);

/// Test-versus-train block: row u holds kappa(test_u, train_j).
MatrixXd build_cross_kernel(std::span<const VectorXd> test, std::span<const VectorXd> train,
                            const KernelSpec& spec);

/// Gram over one patch slot only (values [4 slot, 4 slot + 4)): the 4-qubit
/// fidelity kernel for the quantum kind, RBF on the slice otherwise.
MatrixXd build_patch_slot_gram(std::span<const VectorXd> features, Index slot, const KernelSpec& spec);

/// Persists `<stem>.csv` and a `<stem>.json` sidecar (kind, params, hash).
void save_gram(const GramMatrix& gram, const KernelSpec& spec, const std::filesystem::path& stem,
               const nlohmann::json& extra = nlohmann::json::object());
GramMatrix load_gram(const std::filesystem::path& stem);

struct SmoOptions {
    double tolerance = 1e-4;
    int max_iterations = 10000;
    double psd_slack = 1e-8;
};

struct SvmModel {
    VectorXd dual_coefs;                     // alpha_i * y_i for support vectors
    std::vector<Index> support_indices;      // into the training set
    double bias = 0.0;
    double C = 1.0;
    Index n_train = 0;
    VectorXd alpha;                          // full dual vector, length n_train
    int iterations = 0;
    double kkt_violation = 0.0;              // max gap at termination
    bool converged = false;
    nlohmann::json kernel;                   // kernel spec echo
    std::string feature_snapshot;            // path to training features

    nlohmann::json to_json() const;
    static SvmModel from_json(const nlohmann::json& j);
};

/// Symmetric within 1e-10 and unit diagonal within 1e-10 (both kernels
/// used here are normalized).
void check_gram(const MatrixXd& K, double tol = 1e-10);

double min_eigenvalue(const MatrixXd& K);

/// Clips negative eigenvalues to zero.
MatrixXd clip_to_psd(const MatrixXd& K);

/// Soft-margin dual, most-violating-pair SMO. Labels are -1/+1.
SvmModel train_svm(const MatrixXd& K, std::span<const int> labels, double C = 1.0,
                   const SmoOptions& options = {});
SvmModel train_svm(const GramMatrix& K, std::span<const int> labels, double C = 1.0,
                   const SmoOptions& options = {});

/// Max over I_up of -y G minus min over I_low of -y G for the given dual
/// vector; zero at an exact KKT point.
double kkt_violation(const MatrixXd& K, std::span<const int> labels, const VectorXd& alpha, double C);

/// f(x*) = sum_i alpha_i y_i K*_i + b for each row of `rows` (N* x N).
VectorXd decision_scores(const SvmModel& model, const MatrixXd& rows);

}  // namespace qpatch
