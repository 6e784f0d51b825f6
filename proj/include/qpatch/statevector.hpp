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

// Dense statevector with exactly the gates the embedding circuit needs:
// single-qubit X/Y/Z rotations and CZ.
//
// Qubit 0 is the most significant bit of the basis index, so for n qubits
// qubit q lives at bit (n - 1 - q). Rotations follow R_A(theta) =
// exp(-i theta A / 2).

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "qpatch/common.hpp"

namespace qpatch {

enum class Axis { X, Y, Z };

inline char axis_name(Axis a) { return a == Axis::X ? 'X' : a == Axis::Y ? 'Y' : 'Z'; }

/// Parses "X", "Y" or "Z" (case-insensitive).
inline Axis parse_axis(const std::string& s) {
    if (s == "X" || s == "x") return Axis::X;
    if (s == "Y" || s == "y") return Axis::Y;
    if (s == "Z" || s == "z") return Axis::Z;
    throw InputError("rotation axis must be X, Y or Z, got '" + s + "'");
}

template <typename Scalar>
class StateVector {
public:
    using Complex = std::complex<Scalar>;
    using Amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
    using Gate2 = Eigen::Matrix<Complex, 2, 2>;

    /// |0...0> on n qubits.
    static StateVector zero_state(int n_qubits) {
        if (n_qubits < 1 || n_qubits > 24) throw InputError("qubit count must be in 1..24");
        Amplitudes a = Amplitudes::Zero(Index{1} << n_qubits);
        a[0] = Complex(1);
        return StateVector(std::move(a), n_qubits);
    }

    /// Wraps existing amplitudes; the length must be a power of two.
    explicit StateVector(Amplitudes amplitudes) : amps_(std::move(amplitudes)) {
        const Index dim = amps_.size();
        if (dim < 2 || (dim & (dim - 1)) != 0) throw InputError("statevector length must be a power of two");
        n_qubits_ = 0;
        while ((Index{1} << n_qubits_) < dim) ++n_qubits_;
    }

    int n_qubits() const { return n_qubits_; }
    Index dimension() const { return amps_.size(); }
    const Amplitudes& amplitudes() const { return amps_; }
    Scalar norm_squared() const { return amps_.squaredNorm(); }

    /// <this|other>
    Complex overlap(const StateVector& other) const {
        if (other.dimension() != dimension()) throw InputError("overlap of statevectors with different sizes");
        return amps_.dot(other.amps_);
    }

    void rotate(Axis axis, int qubit, Scalar angle) { apply_single(rotation_matrix(axis, angle), qubit); }

    /// Applies an arbitrary 2x2 matrix to one qubit.
    void apply_single(const Gate2& u, int qubit) {
        const Index mask = bit_of(qubit);
        for (Index i = 0; i < dimension(); ++i) {
            if (i & mask) continue;
            const Complex a = amps_[i];
            const Complex b = amps_[i | mask];
            amps_[i] = u(0, 0) * a + u(0, 1) * b;
            amps_[i | mask] = u(1, 0) * a + u(1, 1) * b;
        }
    }

    void cz(int a, int b) {
        if (a == b) throw InputError("CZ needs two distinct qubits");
        const Index both = bit_of(a) | bit_of(b);
        for (Index i = 0; i < dimension(); ++i) {
            if ((i & both) == both) amps_[i] = -amps_[i];
        }
    }

    static Gate2 rotation_matrix(Axis axis, Scalar angle) {
        const Scalar c = std::cos(angle / 2);
        const Scalar s = std::sin(angle / 2);
        const Complex i(0, 1);
        Gate2 u;
        switch (axis) {
            case Axis::X:
                u << Complex(c), -i * s, -i * s, Complex(c);
                break;
            case Axis::Y:
                u << Complex(c), Complex(-s), Complex(s), Complex(c);
                break;
            case Axis::Z:
                u << std::polar(Scalar(1), -angle / 2), Complex(0), Complex(0), std::polar(Scalar(1), angle / 2);
                break;
        }
        return u;
    }

private:
    StateVector(Amplitudes amplitudes, int n_qubits) : amps_(std::move(amplitudes)), n_qubits_(n_qubits) {}

    Index bit_of(int qubit) const {
        if (qubit < 0 || qubit >= n_qubits_) {
            throw InputError("qubit " + std::to_string(qubit) + " out of range for " +
                             std::to_string(n_qubits_) + "-qubit state");
        }
        return Index{1} << (n_qubits_ - 1 - qubit);
    }

    Amplitudes amps_;
    int n_qubits_ = 0;
};

using QState = StateVector<double>;

template <typename Scalar>
StateVector<Scalar> apply_rotation(StateVector<Scalar> state, Axis axis, int qubit, Scalar angle) {
    state.rotate(axis, qubit, angle);
    return state;
}

template <typename Scalar>
StateVector<Scalar> apply_cz(StateVector<Scalar> state, int a, int b) {
    state.cz(a, b);
    return state;
}

/// |<a|b>|^2
template <typename Scalar>
Scalar fidelity(const StateVector<Scalar>& a, const StateVector<Scalar>& b) {
    return std::norm(a.overlap(b));
}

}  // namespace qpatch
