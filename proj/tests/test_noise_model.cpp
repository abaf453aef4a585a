#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "modseq/calibration.hpp"
#include "modseq/errors.hpp"
#include "modseq/noise_model.hpp"
#include "modseq/rng.hpp"

using namespace modseq;

namespace {

double sample_std(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / (v.size() - 1));
}

}  // namespace

TEST_CASE("channel sets") {
    CHECK(all_pauli_channels().size() == 15);
    CHECK(two_local_channels().size() == 9);
    for (const auto& ch : two_local_channels()) CHECK((ch.i > 0 && ch.j > 0));
}

TEST_CASE("config validation and JSON round trip") {
    NoiseConfig c = NoiseConfig::one_over_f_default();
    c.seed = 12345678901234ULL;
    c.channels = two_local_channels();
    c.local_trace_mode = LocalTraceMode::shared;
    const nlohmann::json j = c;
    const NoiseConfig back = j.get<NoiseConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK(back.seed == c.seed);

    CHECK(NoiseConfig::one_over_f_default().nu_min == doctest::Approx(0.05));
    CHECK(NoiseConfig::one_over_f_default().nu_max == doctest::Approx(5.0));

    NoiseConfig bad;
    bad.sigma_nonlocal = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = NoiseConfig{};
    bad.channels = {{0, 0}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.channels = {{1, 1}, {1, 1}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"kind": "pink"})").get<NoiseConfig>(), ConfigError);
    CHECK_THROWS_AS(nlohmann::json::parse(R"({"sigma_local": "big"})").get<NoiseConfig>(), ConfigError);
}

TEST_CASE("quasistatic realizations") {
    NoiseConfig c = NoiseConfig::quasistatic_default();
    c.sigma_nonlocal = 0.0;
    auto rng = substream(1, 0);
    const auto zero = sample_quasistatic(c, 4, rng);
    for (double d : zero.delta) CHECK(d == 0.0);

    c.sigma_nonlocal = 0.13;
    rng = substream(2, 0);
    std::vector<double> draws;
    while (draws.size() < 100000) {
        const auto r = sample_quasistatic(c, 3, rng);
        for (std::size_t k = 0; k < r.channels.size(); ++k) {
            CHECK(r.delta_at(0, k) == r.delta_at(1, k));
            CHECK(r.delta_at(0, k) == r.delta_at(2, k));
            draws.push_back(r.delta_at(0, k));
        }
    }
    const double s = sample_std(draws);
    CHECK(s >= 0.128);
    CHECK(s <= 0.132);
}

TEST_CASE("identical seeds give identical realizations") {
    for (auto c : {NoiseConfig::quasistatic_default(), NoiseConfig::one_over_f_default()}) {
        c.sigma_local = 0.01;
        const auto a = make_ensemble(c, 5, 20, 99);
        const auto b = make_ensemble(c, 5, 20, 99);
        CHECK(a == b);
        const auto other = make_ensemble(c, 5, 20, 100);
        CHECK_FALSE(a == other);
        // Member m does not depend on how many members were requested.
        const auto prefix = make_ensemble(c, 5, 7, 99);
        for (std::size_t m = 0; m < prefix.size(); ++m) CHECK(prefix[m] == a[m]);
    }
}

TEST_CASE("random telegraph values") {
    RtnTrace quiet;
    quiet.horizon = 10.0;
    quiet.initial_state = 1;
    CHECK(rtn_value(quiet, 0.0) == 1);
    CHECK(rtn_value(quiet, 7.3) == 1);

    RtnTrace one;
    one.horizon = 5.0;
    one.switch_times = {1.0};
    CHECK(rtn_value(one, 2.0) == -1);
    CHECK(rtn_value(one, 0.5) == 1);
    CHECK_THROWS_AS(rtn_value(one, 6.0), std::out_of_range);
    CHECK_THROWS_AS(rtn_value(one, -0.1), std::out_of_range);
}

TEST_CASE("switch intervals are exponential (KS at 1%)") {
    auto rng = substream(3, 0);
    const double rate = 2.0;
    const RtnTrace trace = generate_rtn(rate, 50500.0, rng);
    std::vector<double> gaps;
    double last = 0.0;
    for (double t : trace.switch_times) {
        gaps.push_back(t - last);
        last = t;
    }
    REQUIRE(gaps.size() >= 100000);
    gaps.resize(100000);
    std::sort(gaps.begin(), gaps.end());
    double ks = 0.0;
    const double n = static_cast<double>(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double cdf = 1.0 - std::exp(-rate * gaps[i]);
        ks = std::max({ks, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
    }
    CHECK(ks < 1.628 / std::sqrt(n));
}

TEST_CASE("telegraph autocorrelation matches a Lorentzian of half-width nu") {
    // E[x(0) x(t)] = exp(-2 * rate * t) with rate = pi * nu.
    auto rng = substream(4, 0);
    const double nu = 1.0;
    const double t = 0.1;
    double acc = 0.0;
    const int traces = 200000;
    for (int k = 0; k < traces; ++k) {
        const RtnTrace trace = generate_rtn(rtn_switching_rate(nu), t, rng);
        acc += rtn_value(trace, 0.0) * rtn_value(trace, t);
    }
    CHECK(std::abs(acc / traces - std::exp(-2.0 * kPi * nu * t)) < 4.0 / std::sqrt(traces));
}

TEST_CASE("fluctuator rates and weights") {
    const NoiseConfig c = NoiseConfig::one_over_f_default();
    const auto rates = fluctuator_rates(c);
    REQUIRE(rates.size() == 10);
    CHECK(rates.front() == doctest::Approx(c.nu_min));
    CHECK(rates.back() == doctest::Approx(c.nu_max));
    for (std::size_t k = 1; k + 1 < rates.size(); ++k)
        CHECK(rates[k] * rates[k] == doctest::Approx(rates[k - 1] * rates[k + 1]));
    const auto w = fluctuator_weights(c);
    double norm2 = 0.0;
    for (double x : w) norm2 += x * x;
    CHECK(norm2 == doctest::Approx(1.0));
    // alpha < 1: faster fluctuators carry more weight.
    CHECK(w.back() > w.front());
    CHECK(w.back() / w.front() == doctest::Approx(std::pow(rates.back() / rates.front(), 0.15)));
}

TEST_CASE("1/f realizations have the configured spread and zero mean") {
    NoiseConfig c = NoiseConfig::one_over_f_default();
    c.sigma_local = 0.0;
    const auto zero_local = make_ensemble(c, 3, 5, 8);
    for (const auto& r : zero_local)
        for (double e : r.delta_eta) CHECK(e == 0.0);

    const auto ensemble = make_ensemble(c, 2, 10000, 9);
    std::vector<double> first;
    for (const auto& r : ensemble) first.push_back(r.delta_at(0, 0));
    const double s = sample_std(first);
    CHECK(s >= 0.19);
    CHECK(s <= 0.21);
    const double mean = std::accumulate(first.begin(), first.end(), 0.0) / first.size();
    CHECK(std::abs(mean) < 3.0 * 0.2 / std::sqrt(first.size()));

    c.sigma_nonlocal = 0.0;
    for (const auto& r : make_ensemble(c, 3, 5, 8))
        for (double d : r.delta) CHECK(d == 0.0);
}

TEST_CASE("1/f local trace modes") {
    NoiseConfig c = NoiseConfig::one_over_f_default();
    c.local_trace_mode = LocalTraceMode::shared;
    for (const auto& r : make_ensemble(c, 4, 10, 5)) {
        for (int n = 0; n < 4; ++n)
            for (int slot = 1; slot < 6; ++slot) CHECK(r.delta_eta[6 * n + slot] == r.delta_eta[6 * n]);
    }
    c.local_trace_mode = LocalTraceMode::independent;
    int distinct = 0;
    for (const auto& r : make_ensemble(c, 4, 10, 5)) distinct += r.delta_eta[0] != r.delta_eta[1] ? 1 : 0;
    CHECK(distinct > 0);
}

TEST_CASE("perturb_angles") {
    const std::vector<double> angles{kPi / 2, 0.0, -1.0};
    CHECK(perturb_angles(angles, std::vector<double>(3, 0.0)) == angles);
    const auto p = perturb_angles(angles, std::vector<double>{0.01, 0.5, 0.0});
    CHECK(p[0] == doctest::Approx(0.505 * kPi));
    CHECK(p[1] == 0.0);
    CHECK(p[2] == -1.0);
    CHECK_THROWS_AS(perturb_angles(angles, std::vector<double>(2, 0.0)), std::invalid_argument);
}

TEST_CASE("local fidelity estimate") {
    auto rng = substream(6, 0);
    CHECK(estimate_local_fidelity(0.0, 20, 20, rng) == 1.0);
    auto r1 = substream(7, 0);
    auto r2 = substream(7, 0);
    const double f1 = estimate_local_fidelity(0.01, 200, 200, r1);
    const double f2 = estimate_local_fidelity(0.02, 200, 200, r2);
    CHECK(f2 < f1);
    CHECK(f1 < 1.0);
    CHECK_THROWS_AS(estimate_local_fidelity(0.01, 0, 5, rng), std::invalid_argument);
}

TEST_CASE("amplitude calibration") {
    NoiseConfig c = NoiseConfig::quasistatic_default();
    c.seed = 31;
    CHECK(calibrate_amplitude(0.0, c, 4, 50).sigma == 0.0);
    CHECK_THROWS_AS(calibrate_amplitude(0.5, c, 4, 50), ConfigError);
    CHECK_THROWS_AS(calibrate_amplitude(-0.1, c, 4, 50), ConfigError);

    double previous = 0.0;
    for (double target : {0.05, 0.10, 0.20}) {
        const auto r = calibrate_amplitude(target, c, 4, 100);
        CHECK(std::abs(r.epsilon - target) <= 0.05 * target);
        CHECK(r.sigma > previous);
        CHECK(r.std_error > 0.0);
        previous = r.sigma;
    }

    // Single ZZ channel: eps = <sin^2(delta)> = (1 - exp(-2 sigma^2)) / 2.
    NoiseConfig zz = NoiseConfig::quasistatic_default();
    zz.channels = {{3, 3}};
    zz.seed = 32;
    const auto r = calibrate_amplitude(0.10, zz, 1, 4000);
    CHECK(r.sigma == doctest::Approx(std::sqrt(-std::log(0.8) / 2.0)).epsilon(0.03));
}
