#include "modseq/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "modseq/errors.hpp"
#include "modseq/rng.hpp"

namespace modseq {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

double epsilon_std_error(const EnsembleMetrics& m) {
    const double count = static_cast<double>(m.per_realization.size());
    if (count < 2) return 0.0;
    double var = 0.0;
    for (const auto& r : m.per_realization) var += (r.epsilon - m.epsilon) * (r.epsilon - m.epsilon);
    return std::sqrt(var / (count - 1.0) / count);
}

nlohmann::json vec3(const Eigen::Vector3d& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

std::string pauli_expr(const Eigen::Vector3d& v) {
    std::ostringstream os;
    const char* names[] = {"X", "Y", "Z"};
    for (int k = 0; k < 3; ++k) {
        const double x = v[k];
        if (k == 0) os << (x < 0 ? "-" : " ");
        else os << (x < 0 ? " - " : " + ");
        os << fixed(std::abs(x), 3) << " " << names[k];
    }
    return os.str();
}

void apply_options(ExperimentSpec& spec, const CommandOptions& options) {
    if (options.seed) spec.noise.seed = *options.seed;
    spec.optimizer.threads = options.threads;
    spec.validate();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::sweep_N: return "sweep_N";
        case ExperimentKind::noise_contour: return "noise_contour";
        case ExperimentKind::evaluate: return "evaluate";
        case ExperimentKind::decompose: return "decompose";
        case ExperimentKind::calibrate: return "calibrate";
        case ExperimentKind::local_fidelity: return "local_fidelity";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (auto k : {ExperimentKind::sweep_N, ExperimentKind::noise_contour, ExperimentKind::evaluate,
                   ExperimentKind::decompose, ExperimentKind::calibrate, ExperimentKind::local_fidelity})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown experiment '" + s + "'");
}

void ExperimentSpec::validate() const {
    noise.validate();
    optimizer.validate();
    if (N < 1) throw ConfigError("N must be >= 1");
    if (N_list.empty()) throw ConfigError("N_list must not be empty");
    for (std::size_t i = 0; i < N_list.size(); ++i) {
        if (N_list[i] < 1) throw ConfigError("N_list entries must be >= 1");
        if (i > 0 && N_list[i] <= N_list[i - 1]) throw ConfigError("N_list must be strictly ascending");
    }
    if (M_eval < 0) throw ConfigError("M_eval must be >= 0");
    if (grid.points < 1) throw ConfigError("grid.points must be >= 1");
    for (auto [lo, hi] : {std::pair{grid.sigma_local_min, grid.sigma_local_max},
                          std::pair{grid.sigma_nonlocal_min, grid.sigma_nonlocal_max}}) {
        if (!(lo <= hi)) throw ConfigError("grid ranges need min <= max");
        if (!(lo > 0.0) && !(lo == 0.0 && hi == 0.0)) throw ConfigError("log grid needs min > 0 (or min = max = 0)");
    }
    if (n_coeff_sets < 1 || n_angle_sets < 1) throw ConfigError("local fidelity set counts must be >= 1");
}

void to_json(nlohmann::json& j, const ExperimentSpec& s) {
    j = nlohmann::json{{"schema_version", ExperimentSpec::kSchemaVersion},
                       {"experiment", to_string(s.experiment)},
                       {"noise", s.noise},
                       {"optimizer", s.optimizer},
                       {"N_list", s.N_list},
                       {"N", s.N},
                       {"grid",
                        {{"sigma_local", {s.grid.sigma_local_min, s.grid.sigma_local_max}},
                         {"sigma_nonlocal", {s.grid.sigma_nonlocal_min, s.grid.sigma_nonlocal_max}},
                         {"points", s.grid.points}}},
                       {"solution", s.solution},
                       {"M_eval", s.M_eval},
                       {"target_error", s.target_error},
                       {"n_coeff_sets", s.n_coeff_sets},
                       {"n_angle_sets", s.n_angle_sets}};
}

void from_json(const nlohmann::json& j, ExperimentSpec& s) {
    try {
        if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
        const int version = j.value("schema_version", ExperimentSpec::kSchemaVersion);
        if (version != ExperimentSpec::kSchemaVersion)
            throw ConfigError("unsupported experiment schema_version " + std::to_string(version));
        ExperimentSpec out;
        if (j.contains("experiment")) out.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
        if (j.contains("noise")) out.noise = j.at("noise").get<NoiseConfig>();
        if (j.contains("optimizer")) out.optimizer = j.at("optimizer").get<OptimizerConfig>();
        if (j.contains("N_list")) out.N_list = j.at("N_list").get<std::vector<int>>();
        out.N = j.value("N", out.N);
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            if (g.contains("sigma_local")) {
                const auto r = g.at("sigma_local").get<std::vector<double>>();
                if (r.size() != 2) throw ConfigError("grid.sigma_local must be [min, max]");
                out.grid.sigma_local_min = r[0];
                out.grid.sigma_local_max = r[1];
            }
            if (g.contains("sigma_nonlocal")) {
                const auto r = g.at("sigma_nonlocal").get<std::vector<double>>();
                if (r.size() != 2) throw ConfigError("grid.sigma_nonlocal must be [min, max]");
                out.grid.sigma_nonlocal_min = r[0];
                out.grid.sigma_nonlocal_max = r[1];
            }
            out.grid.points = g.value("points", out.grid.points);
        }
        out.solution = j.value("solution", out.solution);
        out.M_eval = j.value("M_eval", out.M_eval);
        out.target_error = j.value("target_error", out.target_error);
        out.n_coeff_sets = j.value("n_coeff_sets", out.n_coeff_sets);
        out.n_angle_sets = j.value("n_angle_sets", out.n_angle_sets);
        out.validate();
        s = std::move(out);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment spec: ") + e.what());
    }
}

ExperimentSpec load_spec(const fs::path& path) { return read_json(path).get<ExperimentSpec>(); }

SolutionRecord SolutionRecord::from_result(const OptimizationResult& r) {
    SolutionRecord s;
    s.params = r.params;
    s.noise = r.noise;
    s.optimizer = r.optimizer;
    s.ensemble_seed = r.ensemble_seed;
    s.J_history = r.J_history;
    s.epsilon = r.final_metrics.epsilon;
    s.epsilon_pe = r.final_metrics.epsilon_pe;
    s.epsilon_uncorrected = r.epsilon_uncorrected;
    s.iterations = r.iterations;
    s.termination_reason = r.error.empty() ? to_string(r.termination_reason) : "failed";
    s.error = r.error;
    return s;
}

void to_json(nlohmann::json& j, const SolutionRecord& s) {
    j = nlohmann::json{{"schema_version", SolutionRecord::kSchemaVersion},
                       {"N", s.params.N},
                       {"noise_kind", to_string(s.noise.kind)},
                       {"angles", s.params.angles},
                       {"noise", s.noise},
                       {"optimizer", s.optimizer},
                       {"seed", s.noise.seed},
                       {"ensemble_seed", s.ensemble_seed},
                       {"J_history", s.J_history},
                       {"metrics",
                        {{"epsilon", s.epsilon},
                         {"epsilon_pe", s.epsilon_pe},
                         {"epsilon_uncorrected", s.epsilon_uncorrected}}},
                       {"iterations", s.iterations},
                       {"termination_reason", s.termination_reason},
                       {"error", s.error}};
}

void from_json(const nlohmann::json& j, SolutionRecord& s) {
    try {
        if (j.value("schema_version", 0) != SolutionRecord::kSchemaVersion)
            throw ConfigError("unsupported solution schema_version");
        SolutionRecord out;
        out.params.N = j.at("N").get<int>();
        out.params.angles = j.at("angles").get<std::vector<double>>();
        out.params.validate();
        out.noise = j.at("noise").get<NoiseConfig>();
        out.optimizer = j.at("optimizer").get<OptimizerConfig>();
        out.ensemble_seed = j.at("ensemble_seed").get<std::uint64_t>();
        out.J_history = j.value("J_history", std::vector<double>{});
        if (j.contains("metrics")) {
            const auto& m = j.at("metrics");
            out.epsilon = m.value("epsilon", 0.0);
            out.epsilon_pe = m.value("epsilon_pe", 0.0);
            out.epsilon_uncorrected = m.value("epsilon_uncorrected", 0.0);
        }
        out.iterations = j.value("iterations", 0);
        out.termination_reason = j.value("termination_reason", std::string{});
        out.error = j.value("error", std::string{});
        s = std::move(out);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("solution file: ") + e.what());
    }
}

std::string solution_file_name(int N, NoiseKind kind) {
    return "solution_N" + std::to_string(N) + "_" + to_string(kind) + ".json";
}

void write_solution(const fs::path& path, const SolutionRecord& record) { write_json(path, record); }

SolutionRecord read_solution(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("solution file not found: " + path.string());
    return read_json(path).get<SolutionRecord>();
}

EnsembleMetrics reevaluate(const SolutionRecord& record, int threads) {
    const FrozenEnsemble ensemble(
        make_ensemble(record.noise, record.params.N, record.optimizer.M, record.ensemble_seed));
    return evaluate_solution(record.params, ensemble, threads);
}

std::string summary_csv(const std::vector<OptimizationResult>& results, bool timing) {
    std::ostringstream os;
    os << "N,epsilon_uncorrected,epsilon_optimized,epsilon_pe,iterations,wall_time_s\n";
    for (const auto& r : results) {
        os << r.params.N << ',';
        if (r.error.empty()) {
            os << num(r.epsilon_uncorrected) << ',' << num(r.final_metrics.epsilon) << ','
               << num(r.final_metrics.epsilon_pe) << ',' << r.iterations;
        } else {
            os << ",,,";
        }
        os << ',';
        if (timing) os << fixed(r.wall_time_s, 3);
        os << '\n';
    }
    return os.str();
}

std::vector<double> log_grid(double lo, double hi, int points) {
    if (points < 1) throw ConfigError("grid needs at least one point");
    if (points == 1 || lo == hi) return {lo};
    if (!(lo > 0.0 && lo < hi)) throw ConfigError("log grid needs 0 < min < max");
    std::vector<double> out(static_cast<std::size_t>(points));
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int k = 0; k < points; ++k) out[k] = std::exp(a + (b - a) * k / (points - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<ContourPoint> contour(const SequenceParams& params, const NoiseConfig& noise, const ContourGrid& grid,
                                  int members, int threads) {
    const auto locals = log_grid(grid.sigma_local_min, grid.sigma_local_max, grid.points);
    const auto nonlocals = log_grid(grid.sigma_nonlocal_min, grid.sigma_nonlocal_max, grid.points);
    std::vector<ContourPoint> out;
    std::uint64_t index = 0;
    for (double sl : locals) {
        for (double snl : nonlocals) {
            NoiseConfig c = noise;
            c.sigma_local = sl;
            c.sigma_nonlocal = snl;
            const auto m = evaluate_solution(params, make_ensemble(c, params.N, members, derive_seed(noise.seed, index++)),
                                             threads);
            out.push_back({sl, snl, m.epsilon, epsilon_std_error(m)});
        }
    }
    return out;
}

std::string contour_csv(const std::vector<ContourPoint>& points) {
    std::ostringstream os;
    os << "sigma_local,sigma_nonlocal,epsilon,std_error\n";
    for (const auto& p : points)
        os << num(p.sigma_local) << ',' << num(p.sigma_nonlocal) << ',' << num(p.epsilon) << ',' << num(p.std_error)
           << '\n';
    return os.str();
}

EvaluationReport evaluate_under(const SequenceParams& params, const NoiseConfig& noise, int members, int threads) {
    noise.validate();
    if (members < 1) throw ConfigError("evaluation needs at least one realization");
    EvaluationReport r;
    r.members = members;
    r.noise = noise;
    r.ensemble_seed = cascade_ensemble_seed(noise.seed, params.N);
    r.metrics = evaluate_solution(params, make_ensemble(noise, params.N, members, r.ensemble_seed), threads);
    r.epsilon_std_error = epsilon_std_error(r.metrics);
    return r;
}

nlohmann::json to_json(const EvaluationReport& r) {
    return {{"seed", r.noise.seed},
            {"ensemble_seed", r.ensemble_seed},
            {"members", r.members},
            {"noise", r.noise},
            {"epsilon", r.metrics.epsilon},
            {"epsilon_std_error", r.epsilon_std_error},
            {"epsilon_pe", r.metrics.epsilon_pe}};
}

DecompositionReport decompose_gate(const Unitary4& u) {
    DecompositionReport r;
    r.cartan = cartan_decompose(u);
    r.invariants = makhlin_invariants(u);
    r.k1 = split_local(r.cartan.k1);
    r.k2 = split_local(r.cartan.k2);
    r.pe_fidelity = pe_fidelity(u);
    r.pe_functional = pe_functional_D(u);
    return r;
}

nlohmann::json to_json(const DecompositionReport& r) {
    const auto& c = r.cartan.c;
    return {{"weyl_coordinates", {c.c1, c.c2, c.c3}},
            {"makhlin_invariants", {r.invariants.g1, r.invariants.g2, r.invariants.g3}},
            {"k1", {{"first", vec3(r.k1.first_pauli_vector)}, {"second", vec3(r.k1.second_pauli_vector)}}},
            {"k2", {{"first", vec3(r.k2.first_pauli_vector)}, {"second", vec3(r.k2.second_pauli_vector)}}},
            {"global_phase", r.cartan.global_phase},
            {"residual", r.cartan.residual},
            {"F_PE", r.pe_fidelity},
            {"D", r.pe_functional}};
}

std::string format_decomposition(const DecompositionReport& r) {
    const auto& c = r.cartan.c;
    std::ostringstream os;
    os << "U  = k1 exp{-i/2 (" << fixed(c.c1, 3) << " XX + " << fixed(c.c2, 3) << " YY + " << fixed(c.c3, 3)
       << " ZZ)} k2\n";
    os << "k1 = exp{-i(" << pauli_expr(r.k1.first_pauli_vector) << ")} (x) exp{-i("
       << pauli_expr(r.k1.second_pauli_vector) << ")}\n";
    os << "k2 = exp{-i(" << pauli_expr(r.k2.first_pauli_vector) << ")} (x) exp{-i("
       << pauli_expr(r.k2.second_pauli_vector) << ")}\n";
    os << "g  = (" << num(r.invariants.g1) << ", " << num(r.invariants.g2) << ", " << num(r.invariants.g3) << ")\n";
    os << "F_PE = " << num(r.pe_fidelity) << "  D = " << num(r.pe_functional) << "  residual = " << num(r.cartan.residual)
       << '\n';
    return os.str();
}

std::string cmd_optimize(ExperimentSpec spec, const CommandOptions& options) {
    apply_options(spec, options);
    SolutionStore store;
    const auto results = cascade_optimize(spec.N_list, spec.noise, spec.optimizer, store);

    std::ostringstream log;
    int failures = 0;
    for (const auto& r : results) {
        write_solution(options.out_dir / "solutions" / solution_file_name(r.params.N, spec.noise.kind),
                       SolutionRecord::from_result(r));
        if (!r.error.empty()) {
            ++failures;
            std::cerr << "N=" << r.params.N << " failed: " << r.error << '\n';
        }
    }
    const std::string csv = summary_csv(results, options.timing);
    write_text(options.out_dir / "summary.csv", csv);
    nlohmann::json run = spec;
    run["seed"] = spec.noise.seed;
    write_json(options.out_dir / "run.json", run);
    if (failures > 0) throw NumericalError(std::to_string(failures) + " sequence length(s) failed; see solution files");
    log << csv;
    return log.str();
}

std::string cmd_contour(ExperimentSpec spec, const CommandOptions& options) {
    apply_options(spec, options);
    const SolutionRecord record = read_solution(spec.solution);
    const auto points = contour(record.params, spec.noise, spec.grid, spec.evaluation_members(), options.threads);
    const std::string csv = contour_csv(points);
    write_text(options.out_dir / "contour.csv", csv);
    return "wrote " + std::to_string(points.size()) + " grid points (seed " + std::to_string(spec.noise.seed) + ")\n";
}

std::string cmd_evaluate(ExperimentSpec spec, const CommandOptions& options) {
    apply_options(spec, options);
    const SolutionRecord record = read_solution(spec.solution);
    const EvaluationReport r = evaluate_under(record.params, spec.noise, spec.evaluation_members(), options.threads);
    nlohmann::json j = to_json(r);
    j["N"] = record.params.N;
    j["solution"] = spec.solution;
    j["optimized_under"] = to_string(record.noise.kind);
    write_json(options.out_dir / "evaluation.json", j);
    return j.dump(2) + "\n";
}

std::string cmd_decompose(ExperimentSpec spec, const CommandOptions& options) {
    apply_options(spec, options);
    const SolutionRecord record = read_solution(spec.solution);
    const DecompositionReport r = decompose_gate(target_gate(record.params));
    nlohmann::json j = to_json(r);
    j["N"] = record.params.N;
    j["solution"] = spec.solution;
    write_json(options.out_dir / "decomposition.json", j);
    return format_decomposition(r);
}

std::string cmd_calibrate(ExperimentSpec spec, const CommandOptions& options) {
    apply_options(spec, options);
    const int members = spec.evaluation_members();
    const CalibrationResult c = calibrate_amplitude(spec.target_error, spec.noise, spec.N, members, options.threads);
    const nlohmann::json j{{"seed", spec.noise.seed},
                           {"kind", to_string(spec.noise.kind)},
                           {"N", spec.N},
                           {"members", members},
                           {"target_error", spec.target_error},
                           {"sigma_nonlocal", c.sigma},
                           {"epsilon", c.epsilon},
                           {"epsilon_std_error", c.std_error},
                           {"iterations", c.iterations}};
    write_json(options.out_dir / "calibration.json", j);
    return j.dump(2) + "\n";
}

std::string cmd_local_fidelity(ExperimentSpec spec, const CommandOptions& options) {
    apply_options(spec, options);
    auto rng = substream(spec.noise.seed, 0);
    const double f = estimate_local_fidelity(spec.noise.sigma_local, spec.n_coeff_sets, spec.n_angle_sets, rng);
    const nlohmann::json j{{"seed", spec.noise.seed},
                           {"sigma_local", spec.noise.sigma_local},
                           {"n_coeff_sets", spec.n_coeff_sets},
                           {"n_angle_sets", spec.n_angle_sets},
                           {"local_fidelity", f}};
    write_json(options.out_dir / "local_fidelity.json", j);
    return j.dump(2) + "\n";
}

std::string run_experiment(const ExperimentSpec& spec, const CommandOptions& options) {
    switch (spec.experiment) {
        case ExperimentKind::sweep_N: return cmd_optimize(spec, options);
        case ExperimentKind::noise_contour: return cmd_contour(spec, options);
        case ExperimentKind::evaluate: return cmd_evaluate(spec, options);
        case ExperimentKind::decompose: return cmd_decompose(spec, options);
        case ExperimentKind::calibrate: return cmd_calibrate(spec, options);
        case ExperimentKind::local_fidelity: return cmd_local_fidelity(spec, options);
    }
    throw ConfigError("unknown experiment");
}

}  // namespace modseq
