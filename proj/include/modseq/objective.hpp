#pragma once

// Robust-sequence objective and its minimization.
//
//     J = (1/M) sum_m [ eps(U_m) + D(U_m) ]
//
// evaluated on a frozen ensemble so that every call with the same
// parameters sees the same noise. The gradient is a forward difference.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modseq/lbfgsb.hpp"
#include "modseq/noise_model.hpp"
#include "modseq/sequence_engine.hpp"

namespace modseq {

struct OptimizerConfig {
    int M = 100;
    double tol_J = 2.2e-6;
    double tol_gradJ = 2.2e-6;
    int max_iterations = 15000;
    double fd_step = 1e-7;
    int history_size = 10;
    /// Same interval for every angle; unbounded when absent.
    std::optional<std::pair<double, double>> bounds;
    int threads = 1;

    void validate() const;
};

void to_json(nlohmann::json& j, const OptimizerConfig& c);
void from_json(const nlohmann::json& j, OptimizerConfig& c);

struct OptimizationResult {
    SequenceParams params;
    std::vector<double> J_history;
    EnsembleMetrics final_metrics;
    /// Identity rotations on the same ensemble.
    double epsilon_uncorrected = 0.0;
    int iterations = 0;
    int function_evaluations = 0;
    double projected_gradient_norm = 0.0;
    TerminationReason termination_reason = TerminationReason::max_iter;
    NoiseConfig noise;
    OptimizerConfig optimizer;
    std::uint64_t ensemble_seed = 0;
    double wall_time_s = 0.0;
    /// Set when the run failed; the other fields then hold whatever was reached.
    std::string error;

    double final_J() const { return J_history.empty() ? 0.0 : J_history.back(); }
};

/// J for `params` on a frozen ensemble. Members are reduced in a fixed
/// pairwise order, so `threads` never changes the result.
double objective_J(const SequenceParams& params, const FrozenEnsemble& ensemble, int threads = 1);

/// Forward differences (f(x + h e_i) - f0) / h_eff with h_eff the step that
/// is actually representable at x_i.
std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                               std::span<const double> x, double f0, double step,
                                               int threads = 1);
std::vector<double> central_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                                std::span<const double> x, double step, int threads = 1);

/// Forward-difference gradient of J on the same frozen ensemble.
std::vector<double> finite_difference_gradient(const SequenceParams& params, const FrozenEnsemble& ensemble,
                                               double fd_step, int threads = 1);
std::vector<double> central_difference_gradient(const SequenceParams& params, const FrozenEnsemble& ensemble,
                                                double fd_step, int threads = 1);

OptimizationResult minimize(const SequenceParams& initial, const FrozenEnsemble& ensemble,
                            const OptimizerConfig& config);

/// Best-known solution per sequence length.
class SolutionStore {
public:
    void put(const SequenceParams& params) { solutions_[params.N] = params; }
    const SequenceParams* find(int N) const {
        auto it = solutions_.find(N);
        return it == solutions_.end() ? nullptr : &it->second;
    }
    bool empty() const { return solutions_.empty(); }

private:
    std::map<int, SequenceParams> solutions_;
};

/// Largest divisor of N below N (1 for primes and N = 1).
int largest_proper_divisor(int N);

/// Tiles the stored solution for the largest proper divisor of N; identity
/// rotations when N is prime or that solution is missing.
SequenceParams initialize_guess(int N, const SolutionStore& store);

/// Seed of the fresh ensemble drawn for length N in a cascade.
std::uint64_t cascade_ensemble_seed(std::uint64_t root_seed, int N);

/// Optimizes each N in ascending order, each on its own ensemble, feeding
/// solutions forward through `store`. A failure for one N is recorded in
/// its result and the cascade continues.
std::vector<OptimizationResult> cascade_optimize(std::span<const int> N_list, const NoiseConfig& noise,
                                                 const OptimizerConfig& config, SolutionStore& store);

}  // namespace modseq
