#pragma once

// Dense two-qubit gate arithmetic.
//
// Conventions used throughout the library:
//   * basis ordering |q1 q2> = |00>, |01>, |10>, |11> (qubit 1 is the left
//     Kronecker factor);
//   * sigma_ij = sigma_i (x) sigma_j with sigma_0 = identity, 1..3 = X, Y, Z;
//   * local rotations use exp(+i*theta*sigma/2) factors (positive sign). Most
//     texts use the negative sign; the optimizer does not care, but stored
//     angles are only meaningful under this convention.

#include <array>
#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace modseq {

using Complex = std::complex<double>;
using Unitary4 = Eigen::Matrix4cd;
using Matrix2c = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;

struct PauliIndexPair {
    int i = 0;
    int j = 0;

    friend bool operator==(const PauliIndexPair&, const PauliIndexPair&) = default;
    friend auto operator<=>(const PauliIndexPair&, const PauliIndexPair&) = default;
};

/// The six Euler angles of one local rotation, in storage order.
struct EulerAngles {
    double gamma1 = 0.0;
    double beta1 = 0.0;
    double alpha1 = 0.0;
    double gamma2 = 0.0;
    double beta2 = 0.0;
    double alpha2 = 0.0;

    static EulerAngles from_array(const std::array<double, 6>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5]};
    }
    std::array<double, 6> to_array() const {
        return {gamma1, beta1, alpha1, gamma2, beta2, alpha2};
    }
};

/// Single-qubit Pauli matrix, index 0..3.
Matrix2c pauli(int index);

/// sigma_i (x) sigma_j. Throws std::out_of_range for indices outside 0..3.
Unitary4 pauli_product(PauliIndexPair pair);

Unitary4 kron(const Matrix2c& a, const Matrix2c& b);

/// exp(-i * scale * H) for Hermitian H, via the spectral decomposition.
/// Throws std::invalid_argument if H is not Hermitian within 1e-12.
Unitary4 expm_hermitian(const Eigen::Matrix4cd& hermitian, double scale);

/// exp(+i g Z/2) exp(+i b Y/2) exp(+i a Z/2), closed form.
Matrix2c euler_zyz(double gamma, double beta, double alpha);

/// Tensor product of the two ZYZ rotations described by `angles`.
Unitary4 local_rotation(const EulerAngles& angles);

/// |tr(O^dagger U)|^2 / 16.
double trace_fidelity(const Unitary4& u, const Unitary4& o);

/// Frobenius norm of U^dagger U - 1.
double unitarity_defect(const Unitary4& u);
bool is_unitary(const Unitary4& u, double tol = 1e-10);
bool is_hermitian(const Eigen::Matrix4cd& h, double tol = 1e-12);

/// Haar-random unitary of dimension 4 (QR of a complex Ginibre matrix with the
/// R-diagonal phases folded back into Q).
Unitary4 haar_unitary4(std::mt19937_64& rng);
Matrix2c haar_unitary2(std::mt19937_64& rng);

/// Random element of SU(2) (x) SU(2).
Unitary4 random_local(std::mt19937_64& rng);

}  // namespace modseq
