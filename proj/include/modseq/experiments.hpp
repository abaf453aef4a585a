#pragma once

// Experiment orchestration behind the command-line tool: spec files,
// solution files, and the CSV/JSON artifacts each command produces.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modseq/calibration.hpp"
#include "modseq/noise_model.hpp"
#include "modseq/objective.hpp"
#include "modseq/weyl_geometry.hpp"

namespace modseq {

enum class ExperimentKind { sweep_N, noise_contour, evaluate, decompose, calibrate, local_fidelity };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Log-spaced grid; an axis with min == max has a single point.
struct ContourGrid {
    double sigma_local_min = 1e-3;
    double sigma_local_max = 1e-1;
    double sigma_nonlocal_min = 1e-2;
    double sigma_nonlocal_max = 1.0;
    int points = 9;
};

struct ExperimentSpec {
    static constexpr int kSchemaVersion = 1;

    ExperimentKind experiment = ExperimentKind::sweep_N;
    NoiseConfig noise;
    OptimizerConfig optimizer;
    std::vector<int> N_list{2, 4, 8, 16};
    int N = 16;
    ContourGrid grid;
    /// Solution file for evaluate / decompose / contour.
    std::string solution;
    /// Realizations per evaluation (evaluate, contour, calibrate); 0 means optimizer.M.
    int M_eval = 0;
    double target_error = 0.10;
    int n_coeff_sets = 1000;
    int n_angle_sets = 1000;

    int evaluation_members() const { return M_eval > 0 ? M_eval : optimizer.M; }
    void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentSpec& s);
void from_json(const nlohmann::json& j, ExperimentSpec& s);

ExperimentSpec load_spec(const std::filesystem::path& path);

/// What a solution file holds.
struct SolutionRecord {
    static constexpr int kSchemaVersion = 1;

    SequenceParams params;
    NoiseConfig noise;  // noise.seed is the root seed of the run
    OptimizerConfig optimizer;
    std::uint64_t ensemble_seed = 0;
    std::vector<double> J_history;
    double epsilon = 0.0;
    double epsilon_pe = 0.0;
    double epsilon_uncorrected = 0.0;
    int iterations = 0;
    std::string termination_reason;
    std::string error;

    static SolutionRecord from_result(const OptimizationResult& r);
};

void to_json(nlohmann::json& j, const SolutionRecord& s);
void from_json(const nlohmann::json& j, SolutionRecord& s);

std::string solution_file_name(int N, NoiseKind kind);
void write_solution(const std::filesystem::path& path, const SolutionRecord& record);
SolutionRecord read_solution(const std::filesystem::path& path);

/// Rebuilds the optimization ensemble from the stored seeds and re-evaluates.
EnsembleMetrics reevaluate(const SolutionRecord& record, int threads = 1);

/// Rows of the sweep summary; wall time is only written when `timing` is set
/// so that repeated runs produce identical bytes.
std::string summary_csv(const std::vector<OptimizationResult>& results, bool timing);

struct ContourPoint {
    double sigma_local = 0.0;
    double sigma_nonlocal = 0.0;
    double epsilon = 0.0;
    double std_error = 0.0;
};

std::vector<double> log_grid(double lo, double hi, int points);

/// Evaluates a fixed solution on the grid; every point gets its own
/// ensemble with seed derive_seed(root_seed, point index).
std::vector<ContourPoint> contour(const SequenceParams& params, const NoiseConfig& noise, const ContourGrid& grid,
                                  int members, int threads = 1);
std::string contour_csv(const std::vector<ContourPoint>& points);

struct EvaluationReport {
    EnsembleMetrics metrics;
    double epsilon_std_error = 0.0;
    int members = 0;
    std::uint64_t ensemble_seed = 0;
    NoiseConfig noise;
};

/// Fresh ensemble of `members` realizations under `noise`, seeded from
/// noise.seed, for a fixed solution.
EvaluationReport evaluate_under(const SequenceParams& params, const NoiseConfig& noise, int members,
                                int threads = 1);
nlohmann::json to_json(const EvaluationReport& r);

struct DecompositionReport {
    CartanDecomposition cartan;
    MakhlinInvariants invariants;
    LocalFactors k1;
    LocalFactors k2;
    double pe_fidelity = 0.0;
    double pe_functional = 0.0;
};

DecompositionReport decompose_gate(const Unitary4& u);
nlohmann::json to_json(const DecompositionReport& r);
/// Human-readable  U = k1 exp{-i/2 (c1 XX + ...)} k2  display.
std::string format_decomposition(const DecompositionReport& r);

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    int threads = 1;
    bool timing = false;
};

/// The commands. Each writes its artifacts under options.out_dir and returns
/// a short text summary for the terminal.
std::string cmd_optimize(ExperimentSpec spec, const CommandOptions& options);
std::string cmd_contour(ExperimentSpec spec, const CommandOptions& options);
std::string cmd_evaluate(ExperimentSpec spec, const CommandOptions& options);
std::string cmd_decompose(ExperimentSpec spec, const CommandOptions& options);
std::string cmd_calibrate(ExperimentSpec spec, const CommandOptions& options);
std::string cmd_local_fidelity(ExperimentSpec spec, const CommandOptions& options);

/// Dispatches on spec.experiment.
std::string run_experiment(const ExperimentSpec& spec, const CommandOptions& options);

}  // namespace modseq
