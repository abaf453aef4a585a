#include "modseq/calibration.hpp"

#include <cmath>
#include <string>

#include "modseq/errors.hpp"
#include "modseq/sequence_engine.hpp"

namespace modseq {

namespace {

class ScaledEnsemble {
public:
    ScaledEnsemble(const NoiseConfig& config, int N, int M, int threads) : N_(N), threads_(threads) {
        NoiseConfig unit = config;
        unit.sigma_nonlocal = 1.0;
        base_ = make_ensemble(unit, N, M, config.seed);
    }

    EnsembleMetrics at(double sigma) const {
        std::vector<NoiseRealization> scaled = base_;
        for (auto& r : scaled)
            for (double& d : r.delta) d *= sigma;
        return evaluate_solution(SequenceParams::identity(N_), scaled, threads_);
    }

private:
    int N_;
    int threads_;
    std::vector<NoiseRealization> base_;
};

CalibrationResult summarize(double sigma, const EnsembleMetrics& m, int iterations) {
    const double count = static_cast<double>(m.per_realization.size());
    double var = 0.0;
    for (const auto& r : m.per_realization) var += (r.epsilon - m.epsilon) * (r.epsilon - m.epsilon);
    const double std_error = count > 1 ? std::sqrt(var / (count - 1.0) / count) : 0.0;
    return {sigma, m.epsilon, std_error, iterations};
}

}  // namespace

CalibrationResult calibrate_amplitude(double target, const NoiseConfig& config, int N, int M, int threads) {
    if (!(target >= 0.0 && target < 0.5)) throw ConfigError("calibration target must lie in [0, 0.5)");
    if (N < 1 || M < 1) throw ConfigError("calibration needs N >= 1 and M >= 1");
    config.validate();
    const ScaledEnsemble ensemble(config, N, M, threads);
    if (target == 0.0) return summarize(0.0, ensemble.at(0.0), 0);

    constexpr double kRelTol = 0.05;
    const double floor = ensemble.at(0.0).epsilon;
    if (floor >= target * (1.0 + kRelTol)) {
        throw NumericalError("local-rotation noise alone already gives epsilon = " + std::to_string(floor) +
                             " above the target");
    }

    double lo = 0.0;
    double hi = 0.05;
    int iterations = 0;
    EnsembleMetrics at_hi = ensemble.at(hi);
    while (at_hi.epsilon < target) {
        lo = hi;
        hi *= 2.0;
        ++iterations;
        if (hi > 64.0) throw NumericalError("calibration could not bracket the target error");
        at_hi = ensemble.at(hi);
    }

    double sigma = hi;
    EnsembleMetrics best = at_hi;
    for (int it = 0; it < 200; ++it) {
        ++iterations;
        if (std::abs(best.epsilon - target) <= 1e-4 * target) break;
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const EnsembleMetrics at_mid = ensemble.at(mid);
        if (at_mid.epsilon < target) lo = mid;
        else hi = mid;
        if (std::abs(at_mid.epsilon - target) < std::abs(best.epsilon - target)) {
            best = at_mid;
            sigma = mid;
        }
    }
    if (std::abs(best.epsilon - target) > kRelTol * target) {
        throw NumericalError("calibration stalled at epsilon = " + std::to_string(best.epsilon));
    }
    return summarize(sigma, best, iterations);
}

}  // namespace modseq
