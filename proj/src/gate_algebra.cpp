#include "modseq/gate_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace modseq {

namespace {

const Complex kI{0.0, 1.0};

template <int Dim>
Eigen::Matrix<Complex, Dim, Dim> haar_unitary(std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Matrix<Complex, Dim, Dim> g;
    for (int r = 0; r < Dim; ++r) {
        for (int c = 0; c < Dim; ++c) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(r, c) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<Eigen::Matrix<Complex, Dim, Dim>> qr(g);
    Eigen::Matrix<Complex, Dim, Dim> q = qr.householderQ();
    const Eigen::Matrix<Complex, Dim, Dim> r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (int k = 0; k < Dim; ++k) {
        const double mag = std::abs(r(k, k));
        const Complex ph = mag > 0.0 ? r(k, k) / mag : Complex(1.0, 0.0);
        q.col(k) *= ph;
    }
    return q;
}

}  // namespace

Matrix2c pauli(int index) {
    Matrix2c p;
    switch (index) {
        case 0: p << 1, 0, 0, 1; break;
        case 1: p << 0, 1, 1, 0; break;
        case 2: p << 0, -kI, kI, 0; break;
        case 3: p << 1, 0, 0, -1; break;
        default: throw std::out_of_range("pauli index must be in 0..3, got " + std::to_string(index));
    }
    return p;
}

Unitary4 kron(const Matrix2c& a, const Matrix2c& b) {
    Unitary4 out;
    for (int r1 = 0; r1 < 2; ++r1)
        for (int c1 = 0; c1 < 2; ++c1)
            for (int r2 = 0; r2 < 2; ++r2)
                for (int c2 = 0; c2 < 2; ++c2)
                    out(2 * r1 + r2, 2 * c1 + c2) = a(r1, c1) * b(r2, c2);
    return out;
}

Unitary4 pauli_product(PauliIndexPair pair) {
    return kron(pauli(pair.i), pauli(pair.j));
}

bool is_hermitian(const Eigen::Matrix4cd& h, double tol) {
    return (h - h.adjoint()).norm() <= tol;
}

double unitarity_defect(const Unitary4& u) {
    return (u.adjoint() * u - Unitary4::Identity()).norm();
}

bool is_unitary(const Unitary4& u, double tol) {
    return unitarity_defect(u) <= tol;
}

Unitary4 expm_hermitian(const Eigen::Matrix4cd& hermitian, double scale) {
    if (!is_hermitian(hermitian)) {
        throw std::invalid_argument("expm_hermitian: generator is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(hermitian);
    const Eigen::Vector4d& w = eig.eigenvalues();
    const Eigen::Matrix4cd& v = eig.eigenvectors();
    Eigen::Vector4cd phases;
    for (int k = 0; k < 4; ++k) phases(k) = std::polar(1.0, -scale * w(k));
    return v * phases.asDiagonal() * v.adjoint();
}

Matrix2c euler_zyz(double gamma, double beta, double alpha) {
    const double c = std::cos(0.5 * beta);
    const double s = std::sin(0.5 * beta);
    const Complex sum = std::polar(1.0, 0.5 * (gamma + alpha));
    const Complex diff = std::polar(1.0, 0.5 * (gamma - alpha));
    Matrix2c m;
    m << c * sum, s * diff,
        -s * std::conj(diff), c * std::conj(sum);
    return m;
}

Unitary4 local_rotation(const EulerAngles& a) {
    return kron(euler_zyz(a.gamma1, a.beta1, a.alpha1), euler_zyz(a.gamma2, a.beta2, a.alpha2));
}

double trace_fidelity(const Unitary4& u, const Unitary4& o) {
    const Complex tr = (o.adjoint() * u).trace();
    return std::min(1.0, std::norm(tr) / 16.0);
}

Unitary4 haar_unitary4(std::mt19937_64& rng) { return haar_unitary<4>(rng); }

Matrix2c haar_unitary2(std::mt19937_64& rng) { return haar_unitary<2>(rng); }

Unitary4 random_local(std::mt19937_64& rng) {
    auto su2 = [&rng]() {
        Matrix2c u = haar_unitary2(rng);
        return Matrix2c(u / std::sqrt(u.determinant()));
    };
    const Matrix2c a = su2();
    const Matrix2c b = su2();
    return kron(a, b);
}

}  // namespace modseq
