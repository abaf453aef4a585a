#pragma once

// Choosing the nonlocal noise amplitude that produces a given uncorrected
// gate error (identity rotations).

#include "modseq/noise_model.hpp"

namespace modseq {

struct CalibrationResult {
    double sigma = 0.0;
    double epsilon = 0.0;
    /// Monte Carlo standard error of epsilon.
    double std_error = 0.0;
    int iterations = 0;
};

/// Bisection on sigma_nonlocal. All trial amplitudes reuse one ensemble
/// drawn at unit amplitude (seed config.seed) and rescaled, so epsilon is a
/// deterministic function of sigma during the search.
/// Throws ConfigError unless 0 <= target < 0.5, NumericalError when the
/// target cannot be bracketed or reached to 5 % relative.
CalibrationResult calibrate_amplitude(double target_uncorrected_error, const NoiseConfig& config, int N, int M,
                                      int threads = 1);

}  // namespace modseq
