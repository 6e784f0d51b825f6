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

#include "qpatch/kernel_learn.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpatch/csv_io.hpp"

namespace qpatch {

std::string to_string(KernelKind kind) { return kind == KernelKind::Quantum ? "quantum" : "rbf"; }

KernelKind parse_kernel_kind(const std::string& s) {
    if (s == "quantum") return KernelKind::Quantum;
    if (s == "rbf") return KernelKind::Rbf;
    throw InputError("kernel kind must be 'quantum' or 'rbf', got '" + s + "'");
}

nlohmann::json KernelSpec::to_json() const {
    nlohmann::json j = {{"kind", to_string(kind)}};
    if (kind == KernelKind::Quantum) {
        j["depth"] = embedding.depth;
        j["s3_axis"] = std::string(1, axis_name(embedding.s3_axis));
    } else {
        j["gamma"] = gamma;
    }
    return j;
}

double rbf_kernel(const VectorXd& x, const VectorXd& y, double gamma) {
    if (x.size() != y.size()) throw InputError("rbf kernel inputs have different lengths");
    return std::exp(-gamma * (x - y).squaredNorm());
}

MatrixXd stack_features(std::span<const VectorXd> features) {
    if (features.empty()) throw InputError("no feature vectors supplied");
    const Index dim = features.front().size();
    MatrixXd X(static_cast<Index>(features.size()), dim);
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != dim) {
            throw InputError("ragged features: row " + std::to_string(i) + " has length " +
                             std::to_string(features[i].size()) + ", expected " + std::to_string(dim));
        }
        X.row(static_cast<Index>(i)) = features[i].transpose();
    }
    return X;
}

double rbf_gamma_scale(std::span<const VectorXd> features) {
    const MatrixXd X = stack_features(features);
    const double mean = X.mean();
    const double var = (X.array() - mean).square().mean();
    const double dim = static_cast<double>(X.cols());
    return var > 0.0 ? 1.0 / (dim * var) : 1.0 / dim;
}

std::string feature_hash(std::span<const VectorXd> features, const KernelSpec& spec) {
    std::uint64_t h = fnv1a64(spec.to_json().dump());
    for (const auto& x : features) {
        for (Index i = 0; i < x.size(); ++i) {
            h = fnv1a64(format_double(x[i]), h);
            h = fnv1a64(",", h);
        }
        h = fnv1a64("\n", h);
    }
    return hex64(h);
}

namespace {

// Evaluates kernel(a_i, b_j) into out(i, j). With `symmetric`, only j >= i is
// computed and then mirrored.
template <typename PairFn>
void fill_kernel(MatrixXd& out, bool symmetric, const PairFn& pair) {
    parallel_for(static_cast<std::size_t>(out.rows()), [&](std::size_t ui) {
        const auto i = static_cast<Index>(ui);
        for (Index j = symmetric ? i : 0; j < out.cols(); ++j) out(i, j) = pair(i, j);
    });
    if (symmetric) out.triangularView<Eigen::StrictlyLower>() = out.transpose();
}

std::vector<EmbeddedFeatures> embed_all(std::span<const VectorXd> features, const EmbeddingConfig& config) {
    std::vector<EmbeddedFeatures> out(features.size());
    parallel_for(features.size(), [&](std::size_t i) { out[i] = embed_features(features[i], config); });
    return out;
}

}  // namespace

GramMatrix build_gram(std::span<const VectorXd> features, const KernelSpec& spec) {
    const MatrixXd X = stack_features(features);
    const Index n = X.rows();
    GramMatrix g;
    g.kind = spec.kind;
    g.values.resize(n, n);
    if (spec.kind == KernelKind::Quantum) {
        const auto embedded = embed_all(features, spec.embedding);
        fill_kernel(g.values, true, [&](Index i, Index j) {
            return fidelity_kernel(embedded[static_cast<std::size_t>(i)], embedded[static_cast<std::size_t>(j)]);
        });
    } else {
        fill_kernel(g.values, true, [&](Index i, Index j) {
            return rbf_kernel(X.row(i).transpose(), X.row(j).transpose(), spec.gamma);
        });
    }
    g.config_hash = feature_hash(features, spec);
    return g;
}

MatrixXd build_cross_kernel(std::span<const VectorXd> test, std::span<const VectorXd> train,
                            const KernelSpec& spec) {
    const MatrixXd Xt = stack_features(test);
    const MatrixXd Xr = stack_features(train);
    if (Xt.cols() != Xr.cols()) throw InputError("test and train features have different lengths");
    MatrixXd out(Xt.rows(), Xr.rows());
    if (spec.kind == KernelKind::Quantum) {
        const auto et = embed_all(test, spec.embedding);
        const auto er = embed_all(train, spec.embedding);
        fill_kernel(out, false, [&](Index i, Index j) {
            return fidelity_kernel(et[static_cast<std::size_t>(i)], er[static_cast<std::size_t>(j)]);
        });
    } else {
        fill_kernel(out, false, [&](Index i, Index j) {
            return rbf_kernel(Xt.row(i).transpose(), Xr.row(j).transpose(), spec.gamma);
        });
    }
    return out;
}

MatrixXd build_patch_slot_gram(std::span<const VectorXd> features, Index slot, const KernelSpec& spec) {
    std::vector<VectorXd> sliced;
    sliced.reserve(features.size());
    for (const auto& x : features) {
        if (slot < 0 || (slot + 1) * kSummaryDim > x.size()) throw InputError("patch slot out of range");
        sliced.emplace_back(x.segment(slot * kSummaryDim, kSummaryDim));
    }
    return build_gram(sliced, spec).values;
}

void save_gram(const GramMatrix& gram, const KernelSpec& spec, const std::filesystem::path& stem,
               const nlohmann::json& extra) {
    auto csv = stem;
    csv += ".csv";
    auto sidecar = stem;
    sidecar += ".json";
    write_matrix_csv(csv, gram.values);
    nlohmann::json meta = {{"kernel_kind", to_string(gram.kind)},
                           {"params", spec.to_json()},
                           {"feature_hash", gram.config_hash},
                           {"rows", gram.values.rows()},
                           {"cols", gram.values.cols()}};
    meta.update(extra);
    write_json(sidecar, meta);
}

GramMatrix load_gram(const std::filesystem::path& stem) {
    auto csv = stem;
    csv += ".csv";
    auto sidecar = stem;
    sidecar += ".json";
    const nlohmann::json meta = read_json(sidecar);
    GramMatrix g;
    g.values = read_matrix_csv(csv);
    g.kind = parse_kernel_kind(meta.at("kernel_kind").get<std::string>());
    g.config_hash = meta.at("feature_hash").get<std::string>();
    return g;
}

// ---------------------------------------------------------------------------
// SVM

nlohmann::json SvmModel::to_json() const {
    std::vector<double> coefs(dual_coefs.data(), dual_coefs.data() + dual_coefs.size());
    return {{"support_indices", support_indices},
            {"dual_coefs", coefs},
            {"bias", bias},
            {"C", C},
            {"n_train", n_train},
            {"iterations", iterations},
            {"kkt_violation", kkt_violation},
            {"converged", converged},
            {"kernel", kernel},
            {"feature_snapshot", feature_snapshot}};
}

SvmModel SvmModel::from_json(const nlohmann::json& j) {
    SvmModel m;
    m.support_indices = j.at("support_indices").get<std::vector<Index>>();
    const auto coefs = j.at("dual_coefs").get<std::vector<double>>();
    if (coefs.size() != m.support_indices.size()) throw InputError("model has mismatched support arrays");
    m.dual_coefs = Eigen::Map<const VectorXd>(coefs.data(), static_cast<Index>(coefs.size()));
    m.bias = j.at("bias").get<double>();
    m.C = j.at("C").get<double>();
    m.n_train = j.at("n_train").get<Index>();
    m.iterations = j.value("iterations", 0);
    m.kkt_violation = j.value("kkt_violation", 0.0);
    m.converged = j.value("converged", true);
    m.kernel = j.value("kernel", nlohmann::json::object());
    m.feature_snapshot = j.value("feature_snapshot", std::string{});
    m.alpha = VectorXd::Zero(m.n_train);
    for (std::size_t s = 0; s < m.support_indices.size(); ++s) {
        const Index idx = m.support_indices[s];
        if (idx < 0 || idx >= m.n_train) throw InputError("model support index out of range");
        m.alpha[idx] = std::abs(m.dual_coefs[static_cast<Index>(s)]);
    }
    return m;
}

void check_gram(const MatrixXd& K, double tol) {
    if (K.rows() != K.cols()) throw InputError("Gram matrix is not square");
    if (!K.allFinite()) throw InputError("Gram matrix has non-finite entries");
    const double asym = (K - K.transpose()).cwiseAbs().maxCoeff();
    if (asym > tol) throw InputError("Gram matrix is not symmetric (max |K - K^T| = " + format_double(asym) + ")");
    const double diag = (K.diagonal().array() - 1.0).abs().maxCoeff();
    if (diag > tol) throw InputError("Gram matrix diagonal deviates from 1 by " + format_double(diag));
}

double min_eigenvalue(const MatrixXd& K) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(K, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

MatrixXd clip_to_psd(const MatrixXd& K) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(K);
    const VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

void check_labels(std::span<const int> labels, Index n) {
    if (static_cast<Index>(labels.size()) != n) throw InputError("label count does not match kernel size");
    bool pos = false, neg = false;
    for (int y : labels) {
        if (y == 1) pos = true;
        else if (y == -1) neg = true;
        else throw InputError("SVM labels must be -1 or +1");
    }
    if (!pos || !neg) throw InputError("SVM training needs both classes present");
}

bool in_up(double a, int y, double C) { return (y == 1 && a < C) || (y == -1 && a > 0.0); }
bool in_low(double a, int y, double C) { return (y == -1 && a < C) || (y == 1 && a > 0.0); }

double gap_of(const VectorXd& G, std::span<const int> y, const VectorXd& alpha, double C) {
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (Index t = 0; t < G.size(); ++t) {
        const double v = -y[static_cast<std::size_t>(t)] * G[t];
        if (in_up(alpha[t], y[static_cast<std::size_t>(t)], C)) m = std::max(m, v);
        if (in_low(alpha[t], y[static_cast<std::size_t>(t)], C)) M = std::min(M, v);
    }
    if (!std::isfinite(m) || !std::isfinite(M)) return 0.0;
    return m - M;
}

}  // namespace

double kkt_violation(const MatrixXd& K, std::span<const int> labels, const VectorXd& alpha, double C) {
    const Index n = K.rows();
    VectorXd y(n);
    for (Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)];
    const MatrixXd Q = y.asDiagonal() * K * y.asDiagonal();
    const VectorXd G = Q * alpha - VectorXd::Ones(n);
    return gap_of(G, labels, alpha, C);
}

SvmModel train_svm(const MatrixXd& K_in, std::span<const int> labels, double C, const SmoOptions& options) {
    if (K_in.rows() != K_in.cols() || K_in.rows() == 0) throw InputError("kernel matrix must be square and non-empty");
    if (!(C > 0.0)) throw InputError("SVM regularization C must be positive");
    const Index n = K_in.rows();
    check_labels(labels, n);
    if ((K_in - K_in.transpose()).cwiseAbs().maxCoeff() > 1e-10) throw InputError("kernel matrix is not symmetric");

    MatrixXd K = K_in;
    const double lambda_min = min_eigenvalue(K);
    if (lambda_min < -options.psd_slack) {
        log_warning("kernel matrix is not PSD (min eigenvalue " + format_double(lambda_min) +
                    "); clipping negative eigenvalues");
        K = clip_to_psd(K);
    }

    VectorXd y(n);
    for (Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)];
    const MatrixXd Q = y.asDiagonal() * K * y.asDiagonal();
    constexpr double kTau = 1e-12;

    VectorXd alpha = VectorXd::Zero(n);
    VectorXd G = -VectorXd::Ones(n);

    SvmModel model;
    model.C = C;
    model.n_train = n;
    int iter = 0;
    double gap = 0.0;
    for (;; ++iter) {
        // Most violating pair; strict comparisons keep the lowest index on ties.
        Index i = -1, j = -1;
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        for (Index t = 0; t < n; ++t) {
            const double v = -y[t] * G[t];
            if (in_up(alpha[t], labels[static_cast<std::size_t>(t)], C) && v > m) {
                m = v;
                i = t;
            }
            if (in_low(alpha[t], labels[static_cast<std::size_t>(t)], C) && v < M) {
                M = v;
                j = t;
            }
        }
        gap = (i < 0 || j < 0) ? 0.0 : m - M;
        if (gap < options.tolerance) {
            model.converged = true;
            break;
        }
        if (iter >= options.max_iterations) break;

        const double ai_old = alpha[i];
        const double aj_old = alpha[j];
        if (y[i] != y[j]) {
            double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - ai_old;
        const double dj = alpha[j] - aj_old;
        G += Q.col(i) * di + Q.col(j) * dj;
    }
    if (!model.converged) {
        log_warning("SMO stopped after " + std::to_string(iter) + " iterations with KKT gap " + format_double(gap));
    }
    model.iterations = iter;
    model.kkt_violation = gap;
    model.alpha = alpha;

    // Bias: mean of y G over free vectors, else midpoint of the feasible range.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    int n_free = 0;
    for (Index t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (alpha[t] >= C) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            free_sum += yg;
        }
    }
    double rho;
    if (n_free > 0) rho = free_sum / n_free;
    else if (!std::isfinite(ub)) rho = lb;
    else if (!std::isfinite(lb)) rho = ub;
    else rho = (ub + lb) / 2.0;
    model.bias = -rho;

    std::vector<double> coefs;
    for (Index t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.support_indices.push_back(t);
            coefs.push_back(alpha[t] * y[t]);
        }
    }
    model.dual_coefs = Eigen::Map<const VectorXd>(coefs.data(), static_cast<Index>(coefs.size()));
    return model;
}

SvmModel train_svm(const GramMatrix& K, std::span<const int> labels, double C, const SmoOptions& options) {
    return train_svm(K.values, labels, C, options);
}

VectorXd decision_scores(const SvmModel& model, const MatrixXd& rows) {
    if (rows.cols() != model.n_train) {
        throw InputError("kernel rows have length " + std::to_string(rows.cols()) + ", model was trained on " +
                         std::to_string(model.n_train));
    }
    VectorXd scores = VectorXd::Constant(rows.rows(), model.bias);
    for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
        scores += model.dual_coefs[static_cast<Index>(s)] * rows.col(model.support_indices[s]);
    }
    return scores;
}

}  // namespace qpatch
