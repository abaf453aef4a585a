#pragma once

// Noise realizations for the sequence model.
//
// A realization fixes, for one sampled world, the coefficient of every noise
// channel in every segment plus a relative error for each of the 6N local
// rotation angles. Two kinds are supported:
//
//   quasistatic  - one Gaussian draw per channel, identical in all segments;
//                  each local angle gets its own Gaussian relative error.
//   one_over_f   - per channel, a weighted sum of random telegraph
//                  fluctuators with log-spaced rates, read once per segment
//                  at a uniformly drawn time inside that segment.
//
// Random telegraph convention: a fluctuator with rate nu has a Lorentzian
// spectrum of half-width nu (ordinary frequency), i.e. autocorrelation
// exp(-2*pi*nu*|t|), i.e. Poisson switching rate pi*nu.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modseq/gate_algebra.hpp"

namespace modseq {

enum class NoiseKind { quasistatic, one_over_f };

/// How the six angle slots of one segment see 1/f local noise.
enum class LocalTraceMode { independent, shared };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

/// All 15 non-identity Pauli pairs.
std::vector<PauliIndexPair> all_pauli_channels();
/// The 9 pairs with both factors non-identity.
std::vector<PauliIndexPair> two_local_channels();

struct NoiseConfig {
    static constexpr int kSchemaVersion = 1;

    NoiseKind kind = NoiseKind::quasistatic;
    double sigma_nonlocal = 0.13;
    double sigma_local = 0.0;
    double alpha = 0.7;
    double gate_time_T = 1.0;
    int n_fluctuators = 10;
    double nu_min = 1.0 / 20.0;
    double nu_max = 5.0;
    std::vector<PauliIndexPair> channels = all_pauli_channels();
    LocalTraceMode local_trace_mode = LocalTraceMode::independent;
    std::uint64_t seed = 0;

    /// Throws ConfigError on violated invariants.
    void validate() const;

    /// Reference defaults for each kind (nu_* tied to gate_time_T).
    static NoiseConfig quasistatic_default();
    static NoiseConfig one_over_f_default();
};

void to_json(nlohmann::json& j, const NoiseConfig& c);
void from_json(const nlohmann::json& j, NoiseConfig& c);

struct NoiseRealization {
    int segment_count = 0;
    std::vector<PauliIndexPair> channels;
    /// delta[n * channels.size() + k] for segment n (0-based), channel k.
    std::vector<double> delta;
    /// delta_eta[6 * n + slot]
    std::vector<double> delta_eta;

    double delta_at(int segment, std::size_t channel) const {
        return delta[static_cast<std::size_t>(segment) * channels.size() + channel];
    }

    /// sum_k delta_{n,k} sigma_k for segment n.
    Eigen::Matrix4cd noise_generator(int segment) const;

    bool operator==(const NoiseRealization&) const = default;

    /// A realization with every coefficient zero.
    static NoiseRealization zero(int segment_count, std::vector<PauliIndexPair> channels = all_pauli_channels());
};

struct RtnTrace {
    std::vector<double> switch_times;  // strictly increasing, within [0, horizon]
    int initial_state = 1;             // +1 or -1
    double switching_rate = 1.0;       // Poisson rate of switch events
    double horizon = 1.0;
};

/// Poisson switching rate of a fluctuator with Lorentzian half-width nu.
double rtn_switching_rate(double nu);

RtnTrace generate_rtn(double switching_rate, double horizon, std::mt19937_64& rng);

/// Value (+-1) at time t. Throws std::out_of_range outside [0, horizon].
int rtn_value(const RtnTrace& trace, double t);

/// Log-spaced fluctuator rates nu_min ... nu_max.
std::vector<double> fluctuator_rates(const NoiseConfig& config);

/// Amplitude weights w_k ~ nu_k^((1 - alpha)/2), normalized to sum w_k^2 = 1
/// so the summed process has unit stationary variance.
std::vector<double> fluctuator_weights(const NoiseConfig& config);

/// One draw of sigma * sum_k w_k x_k(t) at each of the (sorted) `times`,
/// all fluctuators drawn fresh over [0, horizon].
std::vector<double> sample_fluctuator_sum(const NoiseConfig& config, double sigma, std::span<const double> times,
                                          double horizon, std::mt19937_64& rng);

NoiseRealization sample_quasistatic(const NoiseConfig& config, int segment_count, std::mt19937_64& rng);
NoiseRealization sample_one_over_f(const NoiseConfig& config, int segment_count, std::mt19937_64& rng);

/// Dispatches on config.kind.
NoiseRealization sample_realization(const NoiseConfig& config, int segment_count, std::mt19937_64& rng);

/// M realizations; member m uses substream (ensemble_seed, m).
std::vector<NoiseRealization> make_ensemble(const NoiseConfig& config, int segment_count, int members,
                                            std::uint64_t ensemble_seed);

/// eta_i * (1 + delta_eta_i), elementwise.
std::vector<double> perturb_angles(std::span<const double> angles, std::span<const double> delta_eta);

/// Mean trace fidelity between a random local rotation and its perturbed
/// copy; angles uniform in [-4 pi, 4 pi], relative errors N(0, sigma^2).
/// Averages over every (angle set, error set) pair.
double estimate_local_fidelity(double sigma_local, int n_coeff_sets, int n_angle_sets, std::mt19937_64& rng);

}  // namespace modseq
