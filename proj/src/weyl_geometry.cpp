#include "modseq/weyl_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "modseq/errors.hpp"

namespace modseq {

namespace {

const Complex kI{0.0, 1.0};

// sqrt(2) * Q. Entries are 0, +-1, +-i so the transform is exact for gates
// with simple entries; the 1/2 is applied afterwards.
const Unitary4& scaled_magic() {
    static const Unitary4 q = [] {
        Unitary4 m;
        m << 1, -kI, 0, 0,
             0, 0, 1, -kI,
             0, 0, -1, -kI,
             1, kI, 0, 0;
        return m;
    }();
    return q;
}

// m = U_B^T U_B for the given (not necessarily special) unitary.
Unitary4 magic_gram(const Unitary4& u) {
    const Unitary4 ub = to_magic_basis(u);
    return ub.transpose() * ub;
}

void require_unitary(const Unitary4& u, const char* where) {
    const double defect = unitarity_defect(u);
    if (!(defect <= 1e-8)) {
        std::ostringstream os;
        os << where << ": input is not unitary (|U^dag U - 1|_F = " << defect << ")";
        throw std::invalid_argument(os.str());
    }
}

double cubic_value(double z, double a2, double a1, double a0) {
    return ((z + a2) * z + a1) * z + a0;
}

double cubic_slope(double z, double a2, double a1) {
    return (3.0 * z + 2.0 * a2) * z + a1;
}

double newton_polish(double z, double a2, double a1, double a0) {
    for (int it = 0; it < 3; ++it) {
        const double slope = cubic_slope(z, a2, a1);
        if (slope == 0.0) break;
        const double step = cubic_value(z, a2, a1, a0) / slope;
        if (!std::isfinite(step)) break;
        z -= step;
    }
    return z;
}

// Roots of a near-double cluster around `mean`, from the local quadratic
// model of the cubic (the cluster mean is well conditioned, the split is not).
std::pair<double, double> split_double_root(double mean, double a2, double a1, double a0) {
    const double q2 = 3.0 * mean + a2;  // p''(mean) / 2
    const double q1 = cubic_slope(mean, a2, a1);
    const double q0 = cubic_value(mean, a2, a1, a0);
    if (q2 == 0.0) return {mean, mean};
    const double disc = q1 * q1 - 4.0 * q2 * q0;
    if (disc <= 0.0) {
        const double t = -q1 / (2.0 * q2);
        return {mean + t, mean + t};
    }
    const double r = std::sqrt(disc);
    const double t1 = (-q1 + r) / (2.0 * q2);
    const double t2 = (-q1 - r) / (2.0 * q2);
    return {mean + std::max(t1, t2), mean + std::min(t1, t2)};
}

}  // namespace

const Unitary4& magic_basis() {
    static const Unitary4 q = scaled_magic() / std::sqrt(2.0);
    return q;
}

Unitary4 to_special_unitary(const Unitary4& u) {
    const Complex det = u.determinant();
    return u / std::pow(det, 0.25);
}

Unitary4 to_magic_basis(const Unitary4& u) {
    const Unitary4& q = scaled_magic();
    return (q.adjoint() * u * q) * 0.5;
}

Unitary4 from_magic_basis(const Unitary4& u_magic) {
    const Unitary4& q = scaled_magic();
    return (q * u_magic * q.adjoint()) * 0.5;
}

Unitary4 canonical_gate(const WeylCoordinates& c) {
    // Diagonal in the magic basis: XX, YY, ZZ eigenvalues on the four Bell
    // columns are (+,-,+), (-,+,+), (-,-,-), (+,+,-).
    const double lambda[4] = {c.c1 - c.c2 + c.c3, -c.c1 + c.c2 + c.c3,
                              -c.c1 - c.c2 - c.c3, c.c1 + c.c2 - c.c3};
    Eigen::Vector4cd d;
    for (int k = 0; k < 4; ++k) d(k) = std::polar(1.0, -0.5 * lambda[k]);
    return from_magic_basis(Unitary4(d.asDiagonal()));
}

MakhlinInvariants makhlin_invariants(const Unitary4& u) {
    require_unitary(u, "makhlin_invariants");
    // Dividing by det U is the same as normalizing U to SU(4) first (m scales
    // with det^(1/2), tr^2 m with det), but keeps exact inputs exact.
    const Complex det = u.determinant();
    const Unitary4 m = magic_gram(u);
    const Complex tr = m.trace();
    const Complex tr2 = (m * m).trace();
    const Complex g12 = tr * tr / (16.0 * det);
    const Complex g3 = (tr * tr - tr2) / (4.0 * det);
    return {g12.real(), g12.imag(), g3.real()};
}

WeylCoordinates weyl_coordinates(const Unitary4& u) {
    require_unitary(u, "weyl_coordinates");
    const Unitary4 m = magic_gram(to_special_unitary(u));
    Eigen::ComplexEigenSolver<Unitary4> eig(m, /*computeEigenvectors=*/false);

    // Eigenphases of conj(m) in units of 2*pi, mapped to (-1/4, 3/4].
    std::array<double, 4> s{};
    for (int k = 0; k < 4; ++k) {
        double two_s = -std::arg(eig.eigenvalues()(k)) / kPi;
        if (two_s <= -0.5) two_s += 2.0;
        s[k] = 0.5 * two_s;
    }
    std::sort(s.begin(), s.end(), std::greater<>());
    const double total = std::accumulate(s.begin(), s.end(), 0.0);
    const int n = static_cast<int>(std::lround(total));
    for (int k = 0; k < n && k < 4; ++k) s[k] -= 1.0;
    std::rotate(s.begin(), s.begin() + ((n % 4) + 4) % 4, s.end());

    double c1 = s[0] + s[1];
    double c2 = s[0] + s[2];
    double c3 = s[1] + s[2];
    if (c3 < 0.0) {
        c1 = 1.0 - c1;
        c3 = -c3;
    }
    WeylCoordinates c{c1 * kPi, c2 * kPi, c3 * kPi};
    // Base identification (c1, c2, 0) ~ (pi - c1, c2, 0).
    if (std::abs(c.c3) < 1e-13) {
        c.c3 = 0.0;
        if (c.c1 > 0.5 * kPi) c.c1 = kPi - c.c1;
    }
    if (std::abs(c.c2) < 1e-13) c.c2 = 0.0;
    return c;
}

double pe_distance_d(const MakhlinInvariants& g) {
    return g.g3 * std::sqrt(g.g1 * g.g1 + g.g2 * g.g2) - g.g1;
}

CubicRoots weyl_cubic_roots(const MakhlinInvariants& g) {
    // z^3 + a2 z^2 + a1 z + a0
    const double rho = std::sqrt(g.g1 * g.g1 + g.g2 * g.g2);
    const double a2 = -g.g3;
    const double a1 = 4.0 * rho - 1.0;
    const double a0 = g.g3 - 4.0 * g.g1;

    Eigen::Matrix3d companion;
    companion << -a2, -a1, -a0,
                 1.0, 0.0, 0.0,
                 0.0, 1.0, 0.0;
    Eigen::EigenSolver<Eigen::Matrix3d> eig(companion, /*computeEigenvectors=*/false);
    std::array<double, 3> z{};
    for (int k = 0; k < 3; ++k) z[k] = eig.eigenvalues()(k).real();
    std::sort(z.begin(), z.end(), std::greater<>());

    // Multiple roots (identity, SWAP, CNOT, ...) come out of the eigensolver
    // split by ~eps^(1/k). Rebuild clusters from Vieta's sum, which is exact.
    constexpr double kCluster = 1e-4;
    const bool top = z[0] - z[1] < kCluster;
    const bool bottom = z[1] - z[2] < kCluster;
    if (top && bottom) {
        z[0] = z[1] = z[2] = g.g3 / 3.0;
    } else if (top) {
        z[2] = newton_polish(z[2], a2, a1, a0);
        const auto [hi, lo] = split_double_root(0.5 * (g.g3 - z[2]), a2, a1, a0);
        z[0] = hi;
        z[1] = lo;
    } else if (bottom) {
        z[0] = newton_polish(z[0], a2, a1, a0);
        const auto [hi, lo] = split_double_root(0.5 * (g.g3 - z[0]), a2, a1, a0);
        z[1] = hi;
        z[2] = lo;
    } else {
        for (double& root : z) root = newton_polish(root, a2, a1, a0);
    }
    for (double& root : z) root = std::clamp(root, -1.0, 1.0);
    std::sort(z.begin(), z.end(), std::greater<>());
    return {z[0], z[1], z[2]};
}

double w1_indicator_s(const MakhlinInvariants& g) {
    const CubicRoots r = weyl_cubic_roots(g);
    return kPi - std::acos(r.z1) - std::acos(r.z3);
}

double pe_functional_D(const MakhlinInvariants& g) {
    const double d = pe_distance_d(g);
    if (d > 0.0) {
        return w1_indicator_s(g) > 0.0 ? d : 0.0;
    }
    if (d < 0.0) {
        return w1_indicator_s(g) < 0.0 ? -d : 0.0;
    }
    return 0.0;
}

double pe_functional_D(const Unitary4& u) {
    return pe_functional_D(makhlin_invariants(u));
}

double pe_fidelity(const WeylCoordinates& c) {
    constexpr double half_pi = 0.5 * kPi;
    auto cos2 = [](double x) {
        const double v = std::cos(x);
        return v * v;
    };
    if (c.c1 + c.c2 <= half_pi) return cos2((c.c1 + c.c2 - half_pi) / 4.0);
    if (c.c2 + c.c3 >= half_pi) return cos2((c.c2 + c.c3 - half_pi) / 4.0);
    if (c.c1 - c.c2 >= half_pi) return cos2((c.c1 - c.c2 - half_pi) / 4.0);
    return 1.0;
}

double pe_fidelity(const Unitary4& u) {
    return pe_fidelity(weyl_coordinates(u));
}

Eigen::Vector3d su2_pauli_vector(const Matrix2c& u) {
    // u = cos(t) 1 - i sin(t) n.sigma
    const double cos_t = std::clamp(0.5 * (u(0, 0) + u(1, 1)).real(), -1.0, 1.0);
    Eigen::Vector3d sn;
    sn(0) = -0.5 * (u(0, 1) + u(1, 0)).imag();
    sn(1) = 0.5 * (u(1, 0) - u(0, 1)).real();
    sn(2) = 0.5 * (u(1, 1) - u(0, 0)).imag();
    const double sin_t = sn.norm();
    const double theta = std::atan2(sin_t, cos_t);
    if (sin_t < 1e-14) {
        if (cos_t > 0.0) return Eigen::Vector3d::Zero();
        return Eigen::Vector3d(0.0, 0.0, theta);
    }
    return sn * (theta / sin_t);
}

LocalFactors split_local(const Unitary4& k) {
    // Realignment: R[(i,r),(j,s)] = k[(i,j),(r,s)] = a(i,r) b(j,s) is rank one.
    Unitary4 realigned;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s)
                    realigned(2 * i + r, 2 * j + s) = k(2 * i + j, 2 * r + s);
    Eigen::JacobiSVD<Unitary4> svd(realigned, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double sigma = svd.singularValues()(0);
    const Eigen::Vector4cd va = svd.matrixU().col(0) * std::sqrt(sigma);
    const Eigen::Vector4cd vb = svd.matrixV().col(0).conjugate() * std::sqrt(sigma);

    LocalFactors out;
    out.first << va(0), va(1), va(2), va(3);
    out.second << vb(0), vb(1), vb(2), vb(3);
    out.first /= std::sqrt(out.first.determinant());
    out.second /= std::sqrt(out.second.determinant());
    out.first_pauli_vector = su2_pauli_vector(out.first);
    out.second_pauli_vector = su2_pauli_vector(out.second);
    return out;
}

CartanDecomposition cartan_decompose(const Unitary4& u, double tol) {
    require_unitary(u, "cartan_decompose");
    const Complex det = u.determinant();
    const double base_phase = std::arg(det) / 4.0;
    const Unitary4 us = u / std::pow(det, 0.25);
    const Unitary4 ub = to_magic_basis(us);
    const Unitary4 m = ub.transpose() * ub;

    // m is symmetric unitary, so Re m and Im m commute and share a real
    // orthonormal eigenbasis. A generic real combination separates it.
    const Eigen::Matrix4d re = m.real();
    const Eigen::Matrix4d im = m.imag();
    std::mt19937_64 mixer(0x5eedc0ffeeULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Matrix4d p;
    Eigen::Vector4cd diag;
    bool found = false;
    for (int attempt = 0; attempt < 100 && !found; ++attempt) {
        const double wa = attempt == 0 ? 1.0 : normal(mixer);
        const double wb = attempt == 0 ? 0.5773502691896258 : normal(mixer);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(wa * re + wb * im);
        p = eig.eigenvectors();
        const Unitary4 rotated = p.transpose().cast<Complex>() * m * p.cast<Complex>();
        diag = rotated.diagonal();
        const Unitary4 off = rotated - Unitary4(diag.asDiagonal());
        found = off.norm() < 1e-11;
    }
    if (!found) {
        throw NumericalError("cartan_decompose: could not diagonalize the magic-basis Gram matrix");
    }

    const WeylCoordinates c = weyl_coordinates(us);
    const Unitary4 a = canonical_gate(c);
    const Eigen::Vector4cd a_diag = to_magic_basis(a).diagonal();

    // Match eigenvalues of m to a_k^2 up to a common sign.
    std::array<int, 4> perm{0, 1, 2, 3};
    std::array<int, 4> best_perm = perm;
    double best_err = std::numeric_limits<double>::infinity();
    double best_sign = 1.0;
    do {
        for (double sign : {1.0, -1.0}) {
            double err = 0.0;
            for (int k = 0; k < 4; ++k) {
                err = std::max(err, std::abs(diag(perm[k]) - sign * a_diag(k) * a_diag(k)));
            }
            if (err < best_err) {
                best_err = err;
                best_perm = perm;
                best_sign = sign;
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    Eigen::Matrix4d p_sorted;
    for (int k = 0; k < 4; ++k) p_sorted.col(k) = p.col(best_perm[k]);
    if (p_sorted.determinant() < 0.0) p_sorted.col(0) *= -1.0;

    // U_B P = sqrt(sign) W A_B with W real orthogonal.
    const Complex root_sign = best_sign > 0.0 ? Complex(1.0, 0.0) : kI;
    Unitary4 w = ub * p_sorted.cast<Complex>();
    for (int k = 0; k < 4; ++k) w.col(k) /= a_diag(k) * root_sign;
    const Eigen::Matrix4d w_real = w.real();

    CartanDecomposition out;
    out.k1 = from_magic_basis(w_real.cast<Complex>());
    out.k2 = from_magic_basis(p_sorted.transpose().cast<Complex>());
    out.c = c;
    out.global_phase = base_phase + std::arg(root_sign);
    const Unitary4 rebuilt = std::polar(1.0, out.global_phase) * out.k1 * a * out.k2;
    out.residual = (u - rebuilt).norm();
    if (!(out.residual <= tol)) {
        std::ostringstream os;
        os << "cartan_decompose: reconstruction residual " << out.residual << " exceeds " << tol;
        throw NumericalError(os.str());
    }
    return out;
}

}  // namespace modseq
