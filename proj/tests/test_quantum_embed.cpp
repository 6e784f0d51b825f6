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

#include <algorithm>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "oracles.hpp"
#include "qpatch/csv_io.hpp"
#include "qpatch/quantum_embed.hpp"

using namespace qpatch;

namespace {

constexpr double kPi = std::numbers::pi;

QState from_oracle(const VectorXcd& v) { return QState(v); }

Eigen::Vector4d random_summary(Rng& rng) {
    return {rng.uniform(-2, 2), rng.uniform(0, 3), rng.uniform(0, 1.5), rng.uniform(-1, 1)};
}

}  // namespace

TEST_CASE("single-qubit rotations") {
    SUBCASE("RY(pi) flips |0> to |1>") {
        const QState s = apply_rotation(QState::zero_state(1), Axis::Y, 0, kPi);
        VectorXcd one = VectorXcd::Zero(2);
        one[1] = 1.0;
        CHECK(std::abs(fidelity(s, from_oracle(one)) - 1.0) < 1e-12);
    }
    SUBCASE("RZ on |0> changes only the phase") {
        const QState before = QState::zero_state(4);
        const QState after = apply_rotation(before, Axis::Z, 2, 1.234);
        CHECK((after.amplitudes().cwiseAbs() - before.amplitudes().cwiseAbs()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(std::abs(fidelity(before, after) - 1.0) < 1e-15);
    }
    SUBCASE("random state, RX(0.7) on q2, against the dense unitary") {
        Rng rng(1);
        const VectorXcd psi = oracle::random_state(rng, 4);
        const QState got = apply_rotation(QState(psi), Axis::X, 2, 0.7);
        const VectorXcd ref = oracle::single_qubit_op(4, 2, oracle::rotation('X', 0.7)) * psi;
        CHECK((got.amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("every axis and qubit against the dense unitary") {
        Rng rng(2);
        for (int trial = 0; trial < 30; ++trial) {
            const VectorXcd psi = oracle::random_state(rng, 4);
            const int q = static_cast<int>(rng.below(4));
            const double theta = rng.uniform(-kPi, kPi);
            for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
                const QState got = apply_rotation(QState(psi), a, q, theta);
                const VectorXcd ref = oracle::single_qubit_op(4, q, oracle::rotation(axis_name(a), theta)) * psi;
                CHECK((got.amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-12);
                CHECK(std::abs(got.norm_squared() - 1.0) < 1e-10);
            }
        }
    }
    CHECK_THROWS_AS(apply_rotation(QState::zero_state(4), Axis::X, 4, 0.1), InputError);
}

TEST_CASE("controlled-Z") {
    CHECK((apply_cz(QState::zero_state(2), 0, 1).amplitudes() - QState::zero_state(2).amplitudes()).norm() == 0.0);

    VectorXcd bell = VectorXcd::Zero(4);
    bell[0] = bell[3] = 1.0 / std::sqrt(2.0);
    const QState out = apply_cz(QState(bell), 0, 1);
    CHECK(std::abs(out.amplitudes()[0] - bell[0]) < 1e-15);
    CHECK(std::abs(out.amplitudes()[3] + bell[3]) < 1e-15);

    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const VectorXcd psi = oracle::random_state(rng, 8);
        const int a = static_cast<int>(rng.below(8));
        int b = static_cast<int>(rng.below(8));
        if (b == a) b = (a + 1) % 8;
        const QState got = apply_cz(QState(psi), a, b);
        CHECK((got.amplitudes() - oracle::cz_op(8, a, b) * psi).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(apply_cz(QState::zero_state(4), 1, 1), InputError);
}

TEST_CASE("CZ order within a layer does not matter") {
    Rng rng(4);
    const VectorXcd psi = oracle::random_state(rng, 8);
    std::vector<std::pair<int, int>> pairs = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}};
    QState a(psi);
    for (auto [x, y] : pairs) a.cz(x, y);
    for (int shuffle = 0; shuffle < 5; ++shuffle) {
        rng.shuffle(pairs);
        QState b(psi);
        for (auto [x, y] : pairs) b.cz(x, y);
        CHECK((a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("circuit layout") {
    const CircuitSpec one = build_circuit(1);
    CHECK(one.n_qubits == 4);
    CHECK(one.gates.size() == 4 + 3);
    const CircuitSpec two = build_circuit(2, {3, Axis::Z});
    CHECK(two.n_qubits == 8);
    CHECK(two.gates.size() == 3 * (8 + 7));
    int bridges = 0;
    for (const Gate& g : two.gates) {
        if (const auto* cz = std::get_if<CzGate>(&g)) bridges += (cz->a == 3 && cz->b == 4);
    }
    CHECK(bridges == 3);

    CHECK_THROWS_AS(build_circuit(3), InputError);
    CHECK_THROWS_AS(build_circuit(1, {4, Axis::Z}), InputError);
    CHECK_THROWS_AS(build_circuit(1, {0, Axis::Z}), InputError);

    CircuitSpec bad = build_circuit(2);
    bad.gates.emplace_back(CzGate{0, 2});
    CHECK_THROWS_AS(validate(bad, 8), InputError);
    bad = build_circuit(2);
    bad.gates.emplace_back(CzGate{2, 5});
    CHECK_THROWS_AS(validate(bad, 8), InputError);
}

TEST_CASE("embed_patch basics") {
    const QState zero = embed_patch(Eigen::Vector4d::Zero());
    CHECK(std::abs(zero.amplitudes()[0] - 1.0) < 1e-15);
    CHECK(std::abs(zero.norm_squared() - 1.0) < 1e-15);

    // X flip of qubit 0 sets the most significant bit: index 8.
    const QState flipped = embed_patch(Eigen::Vector4d(kPi, 0, 0, 0));
    CHECK(std::abs(std::abs(flipped.amplitudes()[8]) - 1.0) < 1e-12);
}

TEST_CASE("embed_patch matches the dense oracle at every depth") {
    Rng rng(5);
    for (int depth = 1; depth <= 3; ++depth) {
        for (Axis axis : {Axis::Z, Axis::Y}) {
            for (int trial = 0; trial < 10; ++trial) {
                const Eigen::Vector4d s = random_summary(rng);
                const QState got = embed_patch(s, {depth, axis});
                const std::vector<double> a(s.data(), s.data() + 4);
                const VectorXcd ref = oracle::embedding_state(a, depth, axis_name(axis));
                CHECK((got.amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-12);
            }
        }
    }
}

TEST_CASE("embed_pair matches the dense oracle") {
    CHECK(std::abs(embed_pair(Eigen::Vector4d::Zero(), Eigen::Vector4d::Zero()).amplitudes()[0] - 1.0) < 1e-15);
    Rng rng(6);
    for (int depth = 1; depth <= 2; ++depth) {
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::Vector4d a = random_summary(rng), b = random_summary(rng);
            const QState got = embed_pair(a, b, {depth, Axis::Z});
            const std::vector<double> angles = {a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]};
            const VectorXcd ref = oracle::embedding_state(angles, depth);
            CHECK((got.amplitudes() - ref).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(std::abs(got.norm_squared() - 1.0) < 1e-10);
            CHECK(std::abs(fidelity(got, got) - 1.0) < 1e-12);
            const QState swapped = embed_pair(b, a, {depth, Axis::Z});
            CHECK(std::abs(fidelity(swapped, swapped) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("fidelity kernel") {
    Rng rng(7);
    CHECK(fidelity_kernel(VectorXd::Zero(8), VectorXd::Zero(8)) == doctest::Approx(1.0).epsilon(1e-15));
    for (int trial = 0; trial < 100; ++trial) {
        const VectorXd x = oracle::random_vector(rng, 8), y = oracle::random_vector(rng, 8);
        const double kxy = fidelity_kernel(x, y);
        CHECK(std::abs(fidelity_kernel(x, x) - 1.0) < 1e-10);
        CHECK(std::abs(kxy - fidelity_kernel(y, x)) < 1e-12);
        CHECK(kxy >= 0.0);
        CHECK(kxy <= 1.0 + 1e-12);
    }
    for (int trial = 0; trial < 10; ++trial) {
        for (Index len : {Index{4}, Index{8}, Index{16}}) {
            const VectorXd x = oracle::random_vector(rng, len), y = oracle::random_vector(rng, len);
            CHECK(std::abs(fidelity_kernel(x, y) - oracle::fidelity_kernel(x, y)) < 1e-10);
        }
    }
    CHECK_THROWS_AS(fidelity_kernel(VectorXd::Zero(8), VectorXd::Zero(4)), InputError);
    CHECK_THROWS_AS(fidelity_kernel(VectorXd::Zero(12), VectorXd::Zero(12)), InputError);
    CHECK_THROWS_AS(fidelity_kernel(VectorXd::Zero(0), VectorXd::Zero(0)), InputError);
}

TEST_CASE("bandwidth angle is inert under Z and live under Y") {
    Rng rng(8);
    double max_y_change = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const VectorXd x = oracle::random_vector(rng, 8), y = oracle::random_vector(rng, 8);
        VectorXd x2 = x, y2 = y;
        for (Index i : {Index{2}, Index{6}}) {
            x2[i] += rng.uniform(-5, 5);
            y2[i] += rng.uniform(-5, 5);
        }
        for (int depth = 1; depth <= 3; ++depth) {
            CHECK(std::abs(fidelity_kernel(x, y, {depth, Axis::Z}) - fidelity_kernel(x2, y2, {depth, Axis::Z})) <
                  1e-12);
        }
        max_y_change = std::max(max_y_change, std::abs(fidelity_kernel(x, y, {1, Axis::Y}) -
                                                       fidelity_kernel(x2, y2, {1, Axis::Y})));
    }
    CHECK(max_y_change > 1e-3);
}

TEST_CASE("statevector csv export") {
    oracle::TempDir dir("sv");
    const QState s = embed_patch(Eigen::Vector4d(0.3, 1.0, 0.5, -0.2));
    write_statevector_csv(dir.path / "s.csv", s);
    const CsvTable t = read_csv(dir.path / "s.csv");
    CHECK(t.header == std::vector<std::string>{"index", "real", "imag"});
    REQUIRE(t.rows.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(parse_double(t.rows[i][1], "") == s.amplitudes()[static_cast<Index>(i)].real());
        CHECK(parse_double(t.rows[i][2], "") == s.amplitudes()[static_cast<Index>(i)].imag());
    }
}
