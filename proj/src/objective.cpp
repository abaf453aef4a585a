#include "modseq/objective.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "modseq/errors.hpp"
#include "modseq/parallel.hpp"
#include "modseq/rng.hpp"
#include "modseq/weyl_geometry.hpp"

namespace modseq {

namespace {

void check_segments(const SequenceParams& params, const FrozenEnsemble& ensemble) {
    params.validate();
    if (ensemble.size() == 0) throw ConfigError("ensemble must not be empty");
    if (ensemble.segment_count() != params.N) {
        throw std::invalid_argument("ensemble has N = " + std::to_string(ensemble.segment_count()) +
                                    " but the sequence has N = " + std::to_string(params.N));
    }
}

double member_cost(const Unitary4& u, const Unitary4& target) { return gate_error(u, target) + pe_functional_D(u); }

// Caches, per member, the products left and right of every segment so that
// changing the angles of one segment costs a few 4x4 products per member.
class SegmentSplit {
public:
    SegmentSplit(const SequenceParams& params, const FrozenEnsemble& ensemble)
        : ensemble_(ensemble), N_(params.N), M_(ensemble.size()) {
        const auto n = static_cast<std::size_t>(N_);
        z_ = entangling_slice(N_);
        target_right_.assign(n, Unitary4::Identity());
        target_left_.assign(n, Unitary4::Identity());
        std::vector<Unitary4> factors(n);
        for (int k = 0; k < N_; ++k) factors[k] = z_ * local_rotation(params.segment(k));
        fill_partials(factors, target_right_, target_left_);

        right_.assign(M_, std::vector<Unitary4>(n, Unitary4::Identity()));
        left_.assign(M_, std::vector<Unitary4>(n, Unitary4::Identity()));
        for (std::size_t m = 0; m < M_; ++m) {
            for (int k = 0; k < N_; ++k) factors[k] = ensemble.slice(m, k) * ensemble.rotation(params.angles, m, k);
            fill_partials(factors, right_[m], left_[m]);
        }
    }

    // J with only segment n's angles changed to those found in `angles`.
    double displaced_J(std::span<const double> angles, int n) const {
        std::array<double, 6> seg{};
        for (int k = 0; k < 6; ++k) seg[k] = angles[6 * static_cast<std::size_t>(n) + k];
        const Unitary4 target = target_left_[n] * z_ * local_rotation(EulerAngles::from_array(seg)) * target_right_[n];
        std::vector<double> cost(M_);
        for (std::size_t m = 0; m < M_; ++m) {
            const Unitary4 u = left_[m][n] * ensemble_.slice(m, n) * ensemble_.rotation(angles, m, n) * right_[m][n];
            cost[m] = member_cost(u, target);
        }
        return pairwise_sum(cost) / static_cast<double>(M_);
    }

private:
    // right[n] = F_{n-1} ... F_0, left[n] = F_{N-1} ... F_{n+1}.
    void fill_partials(const std::vector<Unitary4>& f, std::vector<Unitary4>& right, std::vector<Unitary4>& left) const {
        for (int k = 1; k < N_; ++k) right[k] = f[k - 1] * right[k - 1];
        for (int k = N_ - 2; k >= 0; --k) left[k] = left[k + 1] * f[k + 1];
    }

    const FrozenEnsemble& ensemble_;
    int N_;
    std::size_t M_;
    Unitary4 z_;
    std::vector<Unitary4> target_right_, target_left_;
    std::vector<std::vector<Unitary4>> right_, left_;
};

double effective_step(double x, double h) {
    const double moved = x + h;
    return moved - x;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (M < 1) throw ConfigError("optimizer M must be >= 1");
    if (!(tol_J > 0.0) || !(tol_gradJ > 0.0)) throw ConfigError("optimizer tolerances must be > 0");
    if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
    if (!(fd_step > 0.0)) throw ConfigError("fd_step must be > 0");
    if (history_size < 1) throw ConfigError("history_size must be >= 1");
    if (bounds && !(bounds->first < bounds->second)) throw ConfigError("bounds must satisfy lower < upper");
}

void to_json(nlohmann::json& j, const OptimizerConfig& c) {
    j = nlohmann::json{{"M", c.M},
                       {"tol_J", c.tol_J},
                       {"tol_gradJ", c.tol_gradJ},
                       {"max_iterations", c.max_iterations},
                       {"fd_step", c.fd_step},
                       {"history_size", c.history_size}};
    j["bounds"] = c.bounds ? nlohmann::json::array({c.bounds->first, c.bounds->second}) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, OptimizerConfig& c) {
    try {
        if (!j.is_object()) throw ConfigError("optimizer config must be a JSON object");
        OptimizerConfig out;
        out.M = j.value("M", out.M);
        out.tol_J = j.value("tol_J", out.tol_J);
        out.tol_gradJ = j.value("tol_gradJ", out.tol_gradJ);
        out.max_iterations = j.value("max_iterations", out.max_iterations);
        out.fd_step = j.value("fd_step", out.fd_step);
        out.history_size = j.value("history_size", out.history_size);
        out.threads = j.value("threads", out.threads);
        if (j.contains("bounds") && !j.at("bounds").is_null()) {
            const auto& b = j.at("bounds");
            if (!b.is_array() || b.size() != 2) throw ConfigError("bounds must be [lower, upper] or null");
            out.bounds = std::make_pair(b[0].get<double>(), b[1].get<double>());
        }
        out.validate();
        c = std::move(out);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("optimizer config: ") + e.what());
    }
}

double objective_J(const SequenceParams& params, const FrozenEnsemble& ensemble, int threads) {
    check_segments(params, ensemble);
    const Unitary4 target = target_gate(params);
    std::vector<double> cost(ensemble.size());
    parallel_for(ensemble.size(), threads,
                 [&](std::size_t m) { cost[m] = member_cost(ensemble.evolve(params, m), target); });
    return pairwise_sum(cost) / static_cast<double>(ensemble.size());
}

std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                               std::span<const double> x, double f0, double step, int threads) {
    if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
    std::vector<double> grad(x.size());
    parallel_for(x.size(), threads, [&](std::size_t i) {
        std::vector<double> moved(x.begin(), x.end());
        const double h = effective_step(x[i], step);
        moved[i] = x[i] + h;
        grad[i] = (f(moved) - f0) / h;
    });
    return grad;
}

std::vector<double> central_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                                std::span<const double> x, double step, int threads) {
    if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
    std::vector<double> grad(x.size());
    parallel_for(x.size(), threads, [&](std::size_t i) {
        std::vector<double> moved(x.begin(), x.end());
        moved[i] = x[i] + step;
        const double up = f(moved);
        moved[i] = x[i] - step;
        const double down = f(moved);
        grad[i] = (up - down) / ((x[i] + step) - (x[i] - step));
    });
    return grad;
}

std::vector<double> finite_difference_gradient(const SequenceParams& params, const FrozenEnsemble& ensemble,
                                               double fd_step, int threads) {
    check_segments(params, ensemble);
    if (!(fd_step > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
    const double f0 = objective_J(params, ensemble, 1);
    const SegmentSplit split(params, ensemble);
    std::vector<double> grad(params.angles.size());
    parallel_for(grad.size(), threads, [&](std::size_t i) {
        std::vector<double> moved = params.angles;
        const double h = effective_step(moved[i], fd_step);
        moved[i] += h;
        grad[i] = (split.displaced_J(moved, static_cast<int>(i / 6)) - f0) / h;
    });
    return grad;
}

std::vector<double> central_difference_gradient(const SequenceParams& params, const FrozenEnsemble& ensemble,
                                                double fd_step, int threads) {
    check_segments(params, ensemble);
    const SegmentSplit split(params, ensemble);
    return central_difference_gradient(
        [&](std::span<const double> x) {
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i] != params.angles[i]) return split.displaced_J(x, static_cast<int>(i / 6));
            return objective_J(params, ensemble, 1);
        },
        params.angles, fd_step, threads);
}

OptimizationResult minimize(const SequenceParams& initial, const FrozenEnsemble& ensemble,
                            const OptimizerConfig& config) {
    config.validate();
    check_segments(initial, ensemble);
    const auto start = std::chrono::steady_clock::now();
    const int N = initial.N;

    LbfgsOptions options;
    options.tol_f = config.tol_J;
    options.tol_pg = config.tol_gradJ;
    options.max_iterations = config.max_iterations;
    options.history_size = config.history_size;
    if (config.bounds) {
        options.lower.assign(initial.angles.size(), config.bounds->first);
        options.upper.assign(initial.angles.size(), config.bounds->second);
    }

    auto as_params = [N](std::span<const double> x) { return SequenceParams{N, std::vector<double>(x.begin(), x.end())}; };
    const ValueOnly value = [&](std::span<const double> x) {
        return objective_J(as_params(x), ensemble, config.threads);
    };
    const ValueAndGradient value_and_gradient = [&](std::span<const double> x, std::span<double> grad) {
        const SequenceParams p = as_params(x);
        const double f = objective_J(p, ensemble, config.threads);
        const auto g = finite_difference_gradient(p, ensemble, config.fd_step, config.threads);
        std::copy(g.begin(), g.end(), grad.begin());
        return f;
    };

    const LbfgsReport report = minimize_lbfgsb(value_and_gradient, value, initial.angles, options);

    OptimizationResult result;
    result.params = as_params(report.x);
    result.J_history = report.f_history;
    result.final_metrics = evaluate_solution(result.params, ensemble, config.threads);
    result.epsilon_uncorrected = evaluate_solution(SequenceParams::identity(N), ensemble, config.threads).epsilon;
    result.iterations = report.iterations;
    result.function_evaluations = report.function_evaluations;
    result.projected_gradient_norm = report.projected_gradient_norm;
    result.termination_reason = report.reason;
    result.optimizer = config;
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

int largest_proper_divisor(int N) {
    for (int d = 2; d * d <= N; ++d)
        if (N % d == 0) return N / d;
    return 1;
}

SequenceParams initialize_guess(int N, const SolutionStore& store) {
    SequenceParams out = SequenceParams::identity(N);
    const int d = largest_proper_divisor(N);
    if (d < 2) return out;
    const SequenceParams* base = store.find(d);
    if (base == nullptr) return out;
    base->validate();
    for (int rep = 0; rep < N / d; ++rep)
        std::copy(base->angles.begin(), base->angles.end(), out.angles.begin() + 6 * static_cast<std::ptrdiff_t>(rep * d));
    return out;
}

std::uint64_t cascade_ensemble_seed(std::uint64_t root_seed, int N) {
    return derive_seed(root_seed, static_cast<std::uint64_t>(N));
}

std::vector<OptimizationResult> cascade_optimize(std::span<const int> N_list, const NoiseConfig& noise,
                                                 const OptimizerConfig& config, SolutionStore& store) {
    noise.validate();
    config.validate();
    for (std::size_t i = 0; i < N_list.size(); ++i) {
        if (N_list[i] < 1) throw ConfigError("sequence lengths must be >= 1");
        if (i > 0 && N_list[i] <= N_list[i - 1]) throw ConfigError("N_list must be strictly ascending");
    }

    std::vector<OptimizationResult> results;
    for (int N : N_list) {
        const std::uint64_t seed = cascade_ensemble_seed(noise.seed, N);
        const SequenceParams init = initialize_guess(N, store);
        OptimizationResult r;
        try {
            const FrozenEnsemble ensemble(make_ensemble(noise, N, config.M, seed));
            r = minimize(init, ensemble, config);
            store.put(r.params);
        } catch (const std::exception& e) {
            r = OptimizationResult{};
            r.params = init;
            r.optimizer = config;
            r.error = e.what();
        }
        r.noise = noise;
        r.ensemble_seed = seed;
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace modseq
