#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "modseq/errors.hpp"
#include "modseq/rng.hpp"
#include "modseq/sequence_engine.hpp"
#include "modseq/weyl_geometry.hpp"
#include "test_support.hpp"

using namespace modseq;
using testing_gates::max_abs_diff;

namespace {

// Values shared with tests/oracle/gen_oracle.py (N = 3, all 15 channels).
const std::vector<double> kOracleAngles{-1.450486622791847, -0.8424235317036399, -3.0156172972103366, -2.195219594153622, -1.0464004879808542, -0.7870966489579994, -0.6243173467685978, -1.535962373032199, 0.5470457750780469, -1.7195974536209084, -3.076439936490748, -1.8861762808183828, -3.1342659477537755, 2.6421636740224557, -0.6735500317540666, 1.7857325725969568, -2.5848487359936603, 2.1790151859982556};
const std::vector<double> kOracleDelta{-0.029717860947511096, -0.10465395377078394, -0.13512978971775483, -0.14679149385523643, 0.09918671096479206, -0.17612231480379015, -0.10952653792673997, 0.013252358885607229, -0.15768028204466972, -0.15019908784778016, 0.21941754243365416, -0.018830734820489074, -0.04857432944823914, 0.2793425827099013, 0.12954575193919693, 0.07493610611340791, 0.1128084758486349, 0.07380328776155644, 0.017038353867832486, -0.30390863886415953, 0.08451009203170019, -0.018080665392472012, 0.19784501228263085, 0.12970690797041615, 0.1765310334945538, -0.05231336475208055, 0.05923726416191153, 0.17081763233295552, -0.12961968726724188, -0.01754837402766187, -0.07036197481828306, 0.025855013228041956, -0.010574249543176041, -0.0453521105465289, 0.10822227009943694, 0.067168078942856, 0.10745110901928188, 0.08564087864492186, -0.17100569548442382, 0.022774744042241193, -0.09125282809748159, 0.20326459532492733, -0.01009523393498633, 0.14525058890479753, 0.08673190895535747};
const std::vector<double> kOracleDeltaEta{0.0012373210871073526, -0.013461794261299153, -0.0028017783209762534, 0.003954696032939856, 0.00954701317440315, 0.01742839566262606, 0.004723043900390911, 0.02090307056983361, -0.0036615026654668948, 0.003035933304604479, -0.0035086852849010946, -0.006919364099966178, -0.016983977395950135, -0.01893771232676127, 0.01370594700107254, -0.016054375593516915, -0.008582988625947568, -0.012986501975166043};

NoiseRealization oracle_realization() {
    NoiseRealization r = NoiseRealization::zero(3);
    r.delta = kOracleDelta;
    r.delta_eta = kOracleDeltaEta;
    return r;
}

NoiseRealization zz_only(int N, double x) {
    NoiseRealization r = NoiseRealization::zero(N, {{3, 3}});
    std::fill(r.delta.begin(), r.delta.end(), x);
    return r;
}

SequenceParams random_params(int N, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    SequenceParams p = SequenceParams::identity(N);
    for (double& a : p.angles) a = ang(rng);
    return p;
}

}  // namespace

TEST_CASE("sequence parameters validate their shape") {
    CHECK_NOTHROW(SequenceParams::identity(4).validate());
    CHECK_THROWS_AS(SequenceParams::identity(0), ConfigError);
    SequenceParams p{2, std::vector<double>(11, 0.0)};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p.angles.assign(12, 0.0);
    p.angles[3] = std::nan("");
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("identity rotations give minus identity for every N") {
    for (int N : {1, 2, 3, 5, 8, 16}) {
        CHECK(max_abs_diff(target_gate(SequenceParams::identity(N)), -Unitary4::Identity()) < 1e-13);
    }
}

TEST_CASE("zero noise reproduces the target exactly") {
    std::mt19937_64 rng(41);
    for (int N : {1, 2, 4, 7}) {
        const auto p = random_params(N, rng);
        CHECK(max_abs_diff(evolve(p, NoiseRealization::zero(N)), target_gate(p)) == 0.0);
    }
}

TEST_CASE("single ZZ channel at N = 1") {
    const double x = 0.37;
    const Unitary4 u = evolve(SequenceParams::identity(1), zz_only(1, x));
    Unitary4 expected = Unitary4::Zero();
    const double zz[4] = {1, -1, -1, 1};
    for (int k = 0; k < 4; ++k) expected(k, k) = std::polar(1.0, -(kPi + x) * zz[k]);
    CHECK(max_abs_diff(u, expected) < 1e-14);
    CHECK(gate_error(u, target_gate(SequenceParams::identity(1))) == doctest::Approx(std::pow(std::sin(x), 2)));
}

TEST_CASE("single ZZ channel follows the sin^2 law for all N") {
    for (int N : {2, 3, 8, 16}) {
        for (double x : {0.01, 0.1, 0.5}) {
            const auto p = SequenceParams::identity(N);
            const double eps = gate_error(evolve(p, zz_only(N, x)), target_gate(p));
            CHECK(eps == doctest::Approx(std::pow(std::sin(x), 2)).epsilon(1e-10));
        }
    }
}

TEST_CASE("gate error examples") {
    std::mt19937_64 rng(42);
    const Unitary4 u = haar_unitary4(rng);
    CHECK(std::abs(gate_error(u, u)) < 1e-14);
    CHECK(gate_error(Unitary4::Identity(), pauli_product({3, 0})) == 1.0);
}

TEST_CASE("full sequence matches the numpy oracle") {
    const auto r = oracle_realization();
    SequenceParams p{3, kOracleAngles};
    Unitary4 u = evolve(p, r);
    CHECK(std::abs(gate_error(u, target_gate(p)) - 0.0884850133580477) < 1e-12);
    CHECK(pe_functional_D(u) == 0.0);
    auto g = makhlin_invariants(u);
    CHECK(std::abs(g.g1 - 0.035404986265003935) < 1e-12);
    CHECK(std::abs(g.g2 - 0.0057391072230655975) < 1e-12);
    CHECK(std::abs(g.g3 - 0.4205077482836996) < 1e-12);

    for (double& a : p.angles) a *= 0.1;
    u = evolve(p, r);
    CHECK(std::abs(gate_error(u, target_gate(p)) - 0.048024358663088296) < 1e-12);
    CHECK(std::abs(pe_functional_D(u) - 1.2767510307388408) < 1e-12);
}

TEST_CASE("evolve output is unitary and N must match") {
    std::mt19937_64 rng(43);
    NoiseConfig c = NoiseConfig::quasistatic_default();
    c.sigma_local = 0.05;
    for (int N : {1, 4, 9}) {
        const auto ensemble = make_ensemble(c, N, 20, 7);
        const auto p = random_params(N, rng);
        for (const auto& r : ensemble) CHECK(unitarity_defect(evolve(p, r)) < 1e-12);
    }
    CHECK_THROWS_AS(evolve(SequenceParams::identity(3), NoiseRealization::zero(4)), std::invalid_argument);
}

TEST_CASE("error onset is quadratic in the noise amplitude") {
    std::mt19937_64 rng(44);
    const auto p = random_params(4, rng);
    NoiseConfig c = NoiseConfig::quasistatic_default();
    c.sigma_nonlocal = 1.0;
    const auto base = make_ensemble(c, 4, 1, 3).front();
    auto scaled = [&](double s) {
        NoiseRealization r = base;
        for (double& d : r.delta) d *= s;
        return gate_error(evolve(p, r), target_gate(p));
    };
    const double e1 = scaled(1e-3);
    const double e2 = scaled(2e-3);
    CHECK(e2 / e1 == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("frozen ensemble evaluation is bit-identical to evolve") {
    std::mt19937_64 rng(45);
    NoiseConfig c = NoiseConfig::one_over_f_default();
    const auto members = make_ensemble(c, 5, 10, 11);
    const FrozenEnsemble frozen(members);
    const auto p = random_params(5, rng);
    for (std::size_t m = 0; m < members.size(); ++m) CHECK(max_abs_diff(frozen.evolve(p, m), evolve(p, members[m])) == 0.0);

    const auto a = evaluate_solution(p, frozen, 1);
    const auto b = evaluate_solution(p, members, 3);
    CHECK(a.epsilon == b.epsilon);
    CHECK(a.epsilon_pe == b.epsilon_pe);
}

TEST_CASE("ensemble metrics") {
    std::mt19937_64 rng(46);
    const auto p = random_params(4, rng);
    const std::vector<NoiseRealization> zeros(5, NoiseRealization::zero(4));
    CHECK(evaluate_solution(p, zeros).epsilon == 0.0);

    NoiseConfig c = NoiseConfig::quasistatic_default();
    auto members = make_ensemble(c, 4, 64, 12);
    const auto forward = evaluate_solution(p, members);
    std::shuffle(members.begin(), members.end(), rng);
    const auto shuffled = evaluate_solution(p, members, 4);
    CHECK(std::abs(forward.epsilon - shuffled.epsilon) < 1e-15 * 64);
    CHECK(std::abs(forward.epsilon_pe - shuffled.epsilon_pe) < 1e-15 * 64);
    CHECK(forward.per_realization.size() == 64);
}

TEST_CASE("pairwise sum") {
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
    std::vector<double> v(1000, 0.1);
    CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
}
