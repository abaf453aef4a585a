#pragma once

// Two-qubit gate geometry: local invariants, Weyl-chamber coordinates, the
// perfect-entangler functional used by the optimizer and the KAK
// decomposition used for reporting.
//
// Canonical gate: A(c) = exp[-(i/2)(c1 XX + c2 YY + c3 ZZ)].
// Weyl chamber: c1 in [0, pi], pi/2 >= c2 >= c3 >= 0, c2 <= min(c1, pi - c1);
// on the base c3 = 0 the points (c1, c2, 0) and (pi - c1, c2, 0) are the same
// class and the representative with c1 <= pi/2 is returned.
//
// Magic basis (columns of Q):
//   (|00> + |11>)/sqrt2, (-i|00> + i|11>)/sqrt2,
//   (|01> - |10>)/sqrt2, (-i|01> - i|10>)/sqrt2.
// Local gates are real orthogonal in this basis. The invariants do not depend
// on this choice; the k1/k2 factors of cartan_decompose do.

#include <array>
#include <optional>
#include <string>

#include "modseq/gate_algebra.hpp"

namespace modseq {

struct MakhlinInvariants {
    double g1 = 0.0;
    double g2 = 0.0;
    double g3 = 0.0;
};

struct WeylCoordinates {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
};

/// Real roots of the Weyl-region cubic, z1 >= z2 >= z3, each in [-1, 1].
struct CubicRoots {
    double z1 = 0.0;
    double z2 = 0.0;
    double z3 = 0.0;
};

/// Local SU(2) (x) SU(2) factor split into its two single-qubit parts, each
/// written as exp(-i v.sigma).
struct LocalFactors {
    Matrix2c first;
    Matrix2c second;
    Eigen::Vector3d first_pauli_vector;
    Eigen::Vector3d second_pauli_vector;
};

struct CartanDecomposition {
    Unitary4 k1;
    WeylCoordinates c;
    Unitary4 k2;
    /// U = exp(i*global_phase) * k1 * A(c) * k2
    double global_phase = 0.0;
    /// Frobenius norm of U - exp(i*phase) k1 A(c) k2.
    double residual = 0.0;
};

const Unitary4& magic_basis();

/// U / det(U)^(1/4), principal root.
Unitary4 to_special_unitary(const Unitary4& u);

/// Q^dagger U Q.
Unitary4 to_magic_basis(const Unitary4& u);
Unitary4 from_magic_basis(const Unitary4& u_magic);

/// A(c) = exp[-(i/2)(c1 XX + c2 YY + c3 ZZ)].
Unitary4 canonical_gate(const WeylCoordinates& c);

/// Throws std::invalid_argument for non-unitary input.
MakhlinInvariants makhlin_invariants(const Unitary4& u);

WeylCoordinates weyl_coordinates(const Unitary4& u);

double pe_distance_d(const MakhlinInvariants& g);

CubicRoots weyl_cubic_roots(const MakhlinInvariants& g);

/// s = pi - acos(z1) - acos(z3); s < 0 marks the W1 region.
double w1_indicator_s(const MakhlinInvariants& g);

/// Zero iff U is a perfect entangler, positive otherwise.
double pe_functional_D(const MakhlinInvariants& g);
double pe_functional_D(const Unitary4& u);

double pe_fidelity(const WeylCoordinates& c);
double pe_fidelity(const Unitary4& u);

/// Throws NumericalError when the reconstruction residual exceeds `tol`.
CartanDecomposition cartan_decompose(const Unitary4& u, double tol = 1e-8);

/// Splits k = exp(i phi) a (x) b into SU(2) factors. k must be local.
LocalFactors split_local(const Unitary4& k);

/// v such that u = exp(-i v.sigma) for u in SU(2), |v| in [0, pi].
Eigen::Vector3d su2_pauli_vector(const Matrix2c& u);

}  // namespace modseq
