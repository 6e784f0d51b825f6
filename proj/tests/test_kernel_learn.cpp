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

#include <cmath>
#include <numeric>

#include <doctest.h>

#include "oracles.hpp"
#include "qpatch/kernel_learn.hpp"

using namespace qpatch;

namespace {

std::vector<VectorXd> random_features(Rng& rng, int n, Index dim = 8) {
    std::vector<VectorXd> out;
    for (int i = 0; i < n; ++i) out.push_back(oracle::random_vector(rng, dim));
    return out;
}

std::vector<int> random_labels(Rng& rng, int n) {
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1 : -1;
    rng.shuffle(y);
    return y;
}

KernelSpec rbf(double gamma) {
    KernelSpec s;
    s.kind = KernelKind::Rbf;
    s.gamma = gamma;
    return s;
}

}  // namespace

TEST_CASE("rbf kernel") {
    VectorXd x = VectorXd::Zero(3), y = VectorXd::Zero(3);
    CHECK(rbf_kernel(x, x, 0.7) == 1.0);
    y[0] = 1.0;
    CHECK(rbf_kernel(x, y, 0.5) == doctest::Approx(0.606531).epsilon(1e-6));
    CHECK(rbf_kernel(x, y, 0.0) == 1.0);
    CHECK_THROWS_AS(rbf_kernel(x, VectorXd::Zero(2), 1.0), InputError);

    std::vector<VectorXd> f = {VectorXd::Constant(4, 1.0), VectorXd::Constant(4, 3.0)};
    CHECK(rbf_gamma_scale(f) == doctest::Approx(1.0 / (4 * 1.0)));
    std::vector<VectorXd> same = {VectorXd::Constant(4, 2.0), VectorXd::Constant(4, 2.0)};
    CHECK(rbf_gamma_scale(same) == doctest::Approx(0.25));
}

TEST_CASE("gram construction") {
    Rng rng(1);
    const KernelSpec q;
    SUBCASE("single sample") {
        const auto f = random_features(rng, 1);
        const GramMatrix g = build_gram(f, q);
        REQUIRE(g.values.rows() == 1);
        CHECK(std::abs(g.values(0, 0) - 1.0) < 1e-12);
    }
    SUBCASE("duplicated sample has unit off-diagonal") {
        auto f = random_features(rng, 3);
        f.push_back(f[1]);
        const GramMatrix g = build_gram(f, q);
        CHECK(std::abs(g.values(1, 3) - 1.0) < 1e-10);
    }
    SUBCASE("matches an entrywise oracle without the symmetry shortcut") {
        const auto f = random_features(rng, 5);
        for (const KernelSpec& spec : {q, rbf(0.3)}) {
            const GramMatrix g = build_gram(f, spec);
            for (Index i = 0; i < 5; ++i) {
                for (Index j = 0; j < 5; ++j) {
                    const double ref = spec.kind == KernelKind::Quantum
                                           ? oracle::fidelity_kernel(f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(j)])
                                           : std::exp(-0.3 * (f[static_cast<std::size_t>(i)] - f[static_cast<std::size_t>(j)]).squaredNorm());
                    CHECK(std::abs(g.values(i, j) - ref) < 1e-12);
                }
            }
        }
    }
    SUBCASE("both kinds are symmetric, unit-diagonal and PSD on 50 samples") {
        const auto f = random_features(rng, 50);
        for (const KernelSpec& spec : {q, rbf(rbf_gamma_scale(f))}) {
            const GramMatrix g = build_gram(f, spec);
            CHECK_NOTHROW(check_gram(g.values));
            CHECK(min_eigenvalue(g.values) >= -1e-8);
        }
    }
    SUBCASE("cross kernel rows equal the matching gram rows") {
        const auto f = random_features(rng, 6);
        const GramMatrix g = build_gram(f, q);
        const std::vector<VectorXd> test = {f[2], f[4]};
        const MatrixXd c = build_cross_kernel(test, f, q);
        CHECK((c.row(0) - g.values.row(2)).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((c.row(1) - g.values.row(4)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SUBCASE("patch slot gram uses the 4-qubit kernel on one slice") {
        const auto f = random_features(rng, 4);
        const MatrixXd s1 = build_patch_slot_gram(f, 1, q);
        CHECK(std::abs(s1(0, 3) - oracle::fidelity_kernel(f[0].tail(4), f[3].tail(4))) < 1e-12);
        CHECK_THROWS_AS(build_patch_slot_gram(f, 2, q), InputError);
    }
    SUBCASE("ragged input is rejected") {
        std::vector<VectorXd> f = {VectorXd::Zero(8), VectorXd::Zero(4)};
        CHECK_THROWS_AS(build_gram(f, q), InputError);
    }
}

TEST_CASE("gram checks and PSD clipping") {
    MatrixXd K = MatrixXd::Identity(3, 3);
    CHECK_NOTHROW(check_gram(K));
    K(0, 1) = 0.5;
    CHECK_THROWS_AS(check_gram(K), InputError);
    K(1, 0) = 0.5;
    K(2, 2) = 0.9;
    CHECK_THROWS_AS(check_gram(K), InputError);

    MatrixXd indefinite(2, 2);
    indefinite << 1, 2, 2, 1;  // eigenvalues 3, -1
    CHECK(min_eigenvalue(indefinite) == doctest::Approx(-1.0));
    CHECK(min_eigenvalue(clip_to_psd(indefinite)) >= -1e-12);
    // Training on it warns and clips rather than failing.
    const std::vector<int> y = {1, -1};
    CHECK_NOTHROW(train_svm(indefinite, y));
}

TEST_CASE("gram persistence round-trips") {
    Rng rng(2);
    oracle::TempDir dir("gram");
    const auto f = random_features(rng, 7);
    const KernelSpec q;
    const GramMatrix g = build_gram(f, q);
    save_gram(g, q, dir.path / "k", {{"row_ids", {"a", "b"}}});
    const GramMatrix back = load_gram(dir.path / "k");
    CHECK(back.values == g.values);
    CHECK(back.kind == KernelKind::Quantum);
    CHECK(back.config_hash == g.config_hash);
    CHECK(feature_hash(f, q) != feature_hash(f, rbf(1.0)));
}

TEST_CASE("two-point closed form") {
    const MatrixXd K = MatrixXd::Identity(2, 2);
    const std::vector<int> y = {1, -1};
    const SvmModel m = train_svm(K, y, 1.0);
    CHECK(std::abs(m.alpha[0] - 1.0) < 1e-9);
    CHECK(std::abs(m.alpha[1] - 1.0) < 1e-9);
    CHECK(std::abs(m.bias) < 1e-9);
    const VectorXd s = decision_scores(m, K);
    CHECK(s[0] > 0);
    CHECK(s[1] < 0);
}

TEST_CASE("separable linear-kernel set trains without errors") {
    MatrixXd X(4, 2);
    X << 2, 2, 3, 1, -2, -1, -1, -3;
    const std::vector<int> y = {1, 1, -1, -1};
    const MatrixXd K = X * X.transpose();
    const SvmModel m = train_svm(K, y, 100.0);
    const VectorXd s = decision_scores(m, K);
    for (Index i = 0; i < 4; ++i) CHECK(s[i] * y[static_cast<std::size_t>(i)] > 0);
    // Primal check: w = sum alpha y x separates with margin >= 1 - tol.
    Eigen::Vector2d w = Eigen::Vector2d::Zero();
    for (Index i = 0; i < 4; ++i) w += m.alpha[i] * y[static_cast<std::size_t>(i)] * X.row(i).transpose();
    for (Index i = 0; i < 4; ++i) CHECK(y[static_cast<std::size_t>(i)] * (X.row(i).dot(w) + m.bias) >= 1 - 1e-3);
}

TEST_CASE("dual feasibility and KKT residual on random problems") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 4 + static_cast<int>(rng.below(37));
        const auto f = random_features(rng, n, 4);
        const auto y = random_labels(rng, n);
        const double C = rng.uniform(0.1, 10.0);
        const MatrixXd K = build_gram(f, rbf(rng.uniform(0.05, 2.0))).values;
        const SvmModel m = train_svm(K, y, C);
        CHECK(m.converged);
        double eq = 0.0;
        for (Index i = 0; i < n; ++i) {
            CHECK(m.alpha[i] >= 0.0);
            CHECK(m.alpha[i] <= C);
            eq += m.alpha[i] * y[static_cast<std::size_t>(i)];
        }
        CHECK(std::abs(eq) < 1e-8);
        CHECK(oracle::kkt_gap(K, y, m.alpha, C) <= 1.5e-4);
        CHECK(std::abs(kkt_violation(K, y, m.alpha, C) - oracle::kkt_gap(K, y, m.alpha, C)) < 1e-9);

        const MatrixXd rows = build_cross_kernel(random_features(rng, 5, 4), f, rbf(0.5));
        const VectorXd s = decision_scores(m, rows);
        for (Index r = 0; r < 5; ++r) {
            CHECK(std::abs(s[r] - oracle::decision(m.alpha, y, m.bias, rows.row(r).transpose())) < 1e-12);
        }
    }
}

TEST_CASE("decision scores on special rows") {
    Rng rng(4);
    const auto f = random_features(rng, 20, 4);
    const auto y = random_labels(rng, 20);
    const MatrixXd K = build_gram(f, rbf(0.5)).values;
    const SvmModel m = train_svm(K, y, 1.0);
    CHECK(decision_scores(m, MatrixXd::Zero(1, 20))[0] == m.bias);
    for (Index i = 0; i < 20; ++i) {
        if (m.alpha[i] > 1e-8 && m.alpha[i] < 1.0 - 1e-8) {
            CHECK(decision_scores(m, K.row(i))[0] * y[static_cast<std::size_t>(i)] > 0);
        }
    }
    CHECK_THROWS_AS(decision_scores(m, MatrixXd::Zero(1, 19)), InputError);
}

TEST_CASE("duplicated dataset gives the same scores") {
    Rng rng(5);
    const auto f = random_features(rng, 12, 4);
    const auto y = random_labels(rng, 12);
    const KernelSpec spec = rbf(0.4);
    std::vector<VectorXd> f2 = f;
    f2.insert(f2.end(), f.begin(), f.end());
    std::vector<int> y2 = y;
    y2.insert(y2.end(), y.begin(), y.end());
    SmoOptions tight;
    tight.tolerance = 1e-10;
    tight.max_iterations = 200000;
    // Duplicating every point doubles each per-sample loss term, so the
    // equivalent problem uses C / 2.
    const SvmModel a = train_svm(build_gram(f, spec).values, y, 2.0, tight);
    const SvmModel b = train_svm(build_gram(f2, spec).values, y2, 1.0, tight);
    const auto probes = random_features(rng, 6, 4);
    const VectorXd sa = decision_scores(a, build_cross_kernel(probes, f, spec));
    const VectorXd sb = decision_scores(b, build_cross_kernel(probes, f2, spec));
    CHECK((sa - sb).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("permuting the training set permutes nothing in the scores") {
    Rng rng(6);
    const int n = 24;
    const auto f = random_features(rng, n, 4);
    const auto y = random_labels(rng, n);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    std::vector<VectorXd> fp;
    std::vector<int> yp;
    for (std::size_t i : perm) {
        fp.push_back(f[i]);
        yp.push_back(y[i]);
    }
    const KernelSpec spec = rbf(0.3);
    SmoOptions tight;
    tight.tolerance = 1e-11;
    tight.max_iterations = 200000;
    const SvmModel a = train_svm(build_gram(f, spec).values, y, 1.0, tight);
    const SvmModel b = train_svm(build_gram(fp, spec).values, yp, 1.0, tight);
    const auto probes = random_features(rng, 8, 4);
    const VectorXd sa = decision_scores(a, build_cross_kernel(probes, f, spec));
    const VectorXd sb = decision_scores(b, build_cross_kernel(probes, fp, spec));
    CHECK((sa - sb).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("training input validation") {
    const MatrixXd K = MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(train_svm(K, std::vector<int>{1, 1, 1}), InputError);
    CHECK_THROWS_AS(train_svm(K, std::vector<int>{1, -1}), InputError);
    CHECK_THROWS_AS(train_svm(K, std::vector<int>{1, -1, 0}), InputError);
    CHECK_THROWS_AS(train_svm(K, std::vector<int>{1, -1, 1}, 0.0), InputError);
}

TEST_CASE("model json round-trip") {
    Rng rng(7);
    const auto f = random_features(rng, 10, 4);
    const auto y = random_labels(rng, 10);
    const MatrixXd K = build_gram(f, rbf(0.5)).values;
    const SvmModel m = train_svm(K, y, 1.0);
    const SvmModel back = SvmModel::from_json(nlohmann::json::parse(m.to_json().dump()));
    CHECK(back.bias == m.bias);
    CHECK(back.support_indices == m.support_indices);
    CHECK((decision_scores(back, K) - decision_scores(m, K)).cwiseAbs().maxCoeff() == 0.0);
}
