#include "modseq/sequence_engine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "modseq/errors.hpp"
#include "modseq/parallel.hpp"
#include "modseq/weyl_geometry.hpp"

namespace modseq {

namespace {

// Left-to-right product from segment N down to segment 1. `slice(n)` and
// `rotation(n)` supply the per-segment factors.
template <typename SliceFn, typename RotationFn>
Unitary4 ordered_product(int segment_count, SliceFn&& slice, RotationFn&& rotation) {
    Unitary4 acc = slice(segment_count - 1);
    acc = acc * rotation(segment_count - 1);
    for (int n = segment_count - 2; n >= 0; --n) {
        acc = acc * slice(n);
        acc = acc * rotation(n);
    }
    return acc;
}

Unitary4 perturbed_rotation(std::span<const double> angles, const NoiseRealization& r, int n) {
    std::array<double, 6> a{};
    for (int k = 0; k < 6; ++k) {
        const std::size_t idx = 6 * static_cast<std::size_t>(n) + k;
        a[k] = angles[idx] * (1.0 + r.delta_eta[idx]);
    }
    return local_rotation(EulerAngles::from_array(a));
}

void check_compatible(const SequenceParams& params, const NoiseRealization& r) {
    if (r.segment_count != params.N) {
        throw std::invalid_argument("realization has " + std::to_string(r.segment_count) +
                                    " segments but the sequence has " + std::to_string(params.N));
    }
}

RealizationMetrics metrics_for(const Unitary4& u, const Unitary4& target) {
    return {gate_error(u, target), 1.0 - pe_fidelity(u)};
}

EnsembleMetrics reduce(std::vector<RealizationMetrics> per) {
    std::vector<double> eps(per.size());
    std::vector<double> pe(per.size());
    for (std::size_t m = 0; m < per.size(); ++m) {
        eps[m] = per[m].epsilon;
        pe[m] = per[m].epsilon_pe;
    }
    EnsembleMetrics out;
    const double count = static_cast<double>(per.size());
    out.epsilon = pairwise_sum(eps) / count;
    out.epsilon_pe = pairwise_sum(pe) / count;
    out.per_realization = std::move(per);
    return out;
}

}  // namespace

SequenceParams SequenceParams::identity(int segment_count) {
    if (segment_count < 1) throw ConfigError("segment count must be >= 1");
    return {segment_count, std::vector<double>(6 * static_cast<std::size_t>(segment_count), 0.0)};
}

EulerAngles SequenceParams::segment(int n) const {
    std::array<double, 6> a{};
    for (int k = 0; k < 6; ++k) a[k] = angles.at(6 * static_cast<std::size_t>(n) + k);
    return EulerAngles::from_array(a);
}

void SequenceParams::validate() const {
    if (N < 1) throw ConfigError("sequence must have N >= 1 segments");
    if (angles.size() != 6 * static_cast<std::size_t>(N)) {
        throw ConfigError("sequence with N = " + std::to_string(N) + " needs " + std::to_string(6 * N) +
                          " angles, got " + std::to_string(angles.size()));
    }
    for (double a : angles)
        if (!std::isfinite(a)) throw ConfigError("sequence angles must be finite");
}

Unitary4 entangling_slice(int segment_count) {
    return expm_hermitian(pauli_product({3, 3}), kPi / segment_count);
}

Unitary4 noisy_slice(const NoiseRealization& realization, int segment) {
    const int n_seg = realization.segment_count;
    const Eigen::Matrix4cd generator = realization.noise_generator(segment);
    if (generator.isZero(0.0)) return entangling_slice(n_seg);
    return entangling_slice(n_seg) * expm_hermitian(generator, 1.0 / n_seg);
}

Unitary4 target_gate(const SequenceParams& params) {
    params.validate();
    const Unitary4 z = entangling_slice(params.N);
    return ordered_product(
        params.N, [&](int) -> const Unitary4& { return z; },
        [&](int n) { return local_rotation(params.segment(n)); });
}

Unitary4 evolve(const SequenceParams& params, const NoiseRealization& realization) {
    params.validate();
    check_compatible(params, realization);
    return ordered_product(
        params.N, [&](int n) { return noisy_slice(realization, n); },
        [&](int n) { return perturbed_rotation(params.angles, realization, n); });
}

double gate_error(const Unitary4& u, const Unitary4& o) {
    if (u == o) return 0.0;
    return 1.0 - trace_fidelity(u, o);
}

double pairwise_sum(std::span<const double> values) {
    if (values.empty()) return 0.0;
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

FrozenEnsemble::FrozenEnsemble(std::vector<NoiseRealization> realizations)
    : realizations_(std::move(realizations)) {
    if (realizations_.empty()) throw ConfigError("ensemble must not be empty");
    segment_count_ = realizations_.front().segment_count;
    slices_.reserve(realizations_.size());
    for (const auto& r : realizations_) {
        if (r.segment_count != segment_count_) throw ConfigError("ensemble members disagree on N");
        std::vector<Unitary4> s;
        s.reserve(static_cast<std::size_t>(segment_count_));
        for (int n = 0; n < segment_count_; ++n) s.push_back(noisy_slice(r, n));
        slices_.push_back(std::move(s));
    }
}

Unitary4 FrozenEnsemble::evolve(const SequenceParams& params, std::size_t member) const {
    const NoiseRealization& r = realizations_.at(member);
    check_compatible(params, r);
    const auto& s = slices_[member];
    return ordered_product(
        params.N, [&](int n) -> const Unitary4& { return s[static_cast<std::size_t>(n)]; },
        [&](int n) { return perturbed_rotation(params.angles, r, n); });
}

Unitary4 FrozenEnsemble::rotation(std::span<const double> angles, std::size_t member, int n) const {
    return perturbed_rotation(angles, realizations_.at(member), n);
}

EnsembleMetrics evaluate_solution(const SequenceParams& params, const FrozenEnsemble& ensemble, int threads) {
    params.validate();
    if (ensemble.size() == 0) throw ConfigError("ensemble must not be empty");
    if (ensemble.segment_count() != params.N) throw std::invalid_argument("ensemble N does not match the sequence");
    const Unitary4 target = target_gate(params);
    std::vector<RealizationMetrics> per(ensemble.size());
    parallel_for(ensemble.size(), threads, [&](std::size_t m) {
        per[m] = metrics_for(ensemble.evolve(params, m), target);
    });
    return reduce(std::move(per));
}

EnsembleMetrics evaluate_solution(const SequenceParams& params, const std::vector<NoiseRealization>& ensemble,
                                  int threads) {
    params.validate();
    if (ensemble.empty()) throw ConfigError("ensemble must not be empty");
    const Unitary4 target = target_gate(params);
    std::vector<RealizationMetrics> per(ensemble.size());
    parallel_for(ensemble.size(), threads, [&](std::size_t m) {
        per[m] = metrics_for(evolve(params, ensemble[m]), target);
    });
    return reduce(std::move(per));
}

}  // namespace modseq
