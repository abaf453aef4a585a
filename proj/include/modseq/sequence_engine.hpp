#pragma once

// The modular sequence
//
//     U = prod_{n=N..1} Z D_n R_n,   Z = exp(-i pi ZZ / N),   D_n = exp(-(i/N) Delta_n)
//
// and its noise-free counterpart O = prod Z R_n (unperturbed angles), plus
// the per-realization and ensemble error metrics built on them.

#include <span>
#include <vector>

#include "modseq/gate_algebra.hpp"
#include "modseq/noise_model.hpp"

namespace modseq {

struct SequenceParams {
    int N = 1;
    /// Segment-major; within a segment (gamma1, beta1, alpha1, gamma2, beta2, alpha2).
    std::vector<double> angles = std::vector<double>(6, 0.0);

    static SequenceParams identity(int segment_count);

    EulerAngles segment(int n) const;

    /// Throws ConfigError if N < 1, the length is not 6N, or an angle is not finite.
    void validate() const;

    bool operator==(const SequenceParams&) const = default;
};

struct RealizationMetrics {
    double epsilon = 0.0;
    double epsilon_pe = 0.0;
};

struct EnsembleMetrics {
    double epsilon = 0.0;
    double epsilon_pe = 0.0;
    std::vector<RealizationMetrics> per_realization;
};

/// exp(-i pi sigma_ZZ / N).
Unitary4 entangling_slice(int segment_count);

/// Z * D_n for segment n (0-based) of a realization.
Unitary4 noisy_slice(const NoiseRealization& realization, int segment);

Unitary4 target_gate(const SequenceParams& params);

/// Throws std::invalid_argument if the realization has a different N.
Unitary4 evolve(const SequenceParams& params, const NoiseRealization& realization);

double gate_error(const Unitary4& u, const Unitary4& o);

/// Pairwise (tree) summation; the result depends only on the order of values.
double pairwise_sum(std::span<const double> values);

/// An ensemble with its noisy slices Z*D_n precomputed. Evaluations through
/// this class are bit-identical to evolve() on the same realization.
class FrozenEnsemble {
public:
    FrozenEnsemble() = default;
    explicit FrozenEnsemble(std::vector<NoiseRealization> realizations);

    int segment_count() const { return segment_count_; }
    std::size_t size() const { return realizations_.size(); }
    const std::vector<NoiseRealization>& realizations() const { return realizations_; }

    Unitary4 evolve(const SequenceParams& params, std::size_t member) const;

    /// Z * D_n of one member.
    const Unitary4& slice(std::size_t member, int n) const { return slices_[member][static_cast<std::size_t>(n)]; }
    /// R_n with that member's relative angle errors applied.
    Unitary4 rotation(std::span<const double> angles, std::size_t member, int n) const;

private:
    int segment_count_ = 0;
    std::vector<NoiseRealization> realizations_;
    std::vector<std::vector<Unitary4>> slices_;
};

/// Per-member epsilon (against the unperturbed target) and
/// epsilon_PE = 1 - F_PE of the noisy gate, with pairwise-summed means.
/// `threads` only affects speed.
EnsembleMetrics evaluate_solution(const SequenceParams& params, const FrozenEnsemble& ensemble, int threads = 1);
EnsembleMetrics evaluate_solution(const SequenceParams& params, const std::vector<NoiseRealization>& ensemble,
                                  int threads = 1);

}  // namespace modseq
