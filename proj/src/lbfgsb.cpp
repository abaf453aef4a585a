#include "modseq/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace modseq {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inf_norm(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

struct CorrectionPair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

class Box {
public:
    explicit Box(const LbfgsOptions& o, std::size_t n) : lower_(o.lower), upper_(o.upper) {
        if (lower_.empty() != upper_.empty()) throw std::invalid_argument("lbfgsb: give both bound vectors or none");
        if (!lower_.empty() && (lower_.size() != n || upper_.size() != n)) {
            throw std::invalid_argument("lbfgsb: bound vectors must match the number of variables");
        }
        for (std::size_t i = 0; i < lower_.size(); ++i)
            if (!(lower_[i] <= upper_[i])) throw std::invalid_argument("lbfgsb: lower bound above upper bound");
    }

    bool active() const { return !lower_.empty(); }

    double clamp(std::size_t i, double v) const { return active() ? std::clamp(v, lower_[i], upper_[i]) : v; }

    void project(std::vector<double>& x) const {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = clamp(i, x[i]);
    }

    bool frozen(std::size_t i, double x, double g) const {
        if (!active()) return false;
        return (x <= lower_[i] && g > 0.0) || (x >= upper_[i] && g < 0.0);
    }

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

}  // namespace

std::string to_string(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::tol_J: return "tol_J";
        case TerminationReason::tol_gradJ: return "tol_gradJ";
        case TerminationReason::max_iter: return "max_iter";
        case TerminationReason::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

double projected_gradient_inf_norm(std::span<const double> x, std::span<const double> grad,
                                   const LbfgsOptions& options) {
    const Box box(options, x.size());
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(box.clamp(i, x[i] - grad[i]) - x[i]));
    return m;
}

std::optional<TerminationReason> check_termination(double f_prev, double f_next, double pg_inf, int iteration,
                                                   const LbfgsOptions& options) {
    if (pg_inf <= options.tol_pg) return TerminationReason::tol_gradJ;
    const double scale = std::max({std::abs(f_prev), std::abs(f_next), 1.0});
    if ((f_prev - f_next) / scale <= options.tol_f) return TerminationReason::tol_J;
    if (iteration >= options.max_iterations) return TerminationReason::max_iter;
    return std::nullopt;
}

LbfgsReport minimize_lbfgsb(const ValueAndGradient& value_and_gradient, const ValueOnly& value,
                            std::vector<double> x0, const LbfgsOptions& options) {
    const std::size_t n = x0.size();
    const Box box(options, n);
    box.project(x0);

    LbfgsReport report;
    report.x = std::move(x0);
    report.gradient.assign(n, 0.0);
    report.f = value_and_gradient(report.x, report.gradient);
    ++report.function_evaluations;
    ++report.gradient_evaluations;
    report.f_history.push_back(report.f);
    report.projected_gradient_norm = projected_gradient_inf_norm(report.x, report.gradient, options);
    if (report.projected_gradient_norm <= options.tol_pg) {
        report.reason = TerminationReason::tol_gradJ;
        return report;
    }
    if (options.max_iterations <= 0) {
        report.reason = TerminationReason::max_iter;
        return report;
    }

    std::deque<CorrectionPair> memory;
    std::vector<double> direction(n), trial(n), trial_grad(n), q(n);
    std::vector<double> alpha_coef;

    for (int iter = 1;; ++iter) {
        auto& x = report.x;
        auto& g = report.gradient;

        // Two-loop recursion on the free variables.
        std::vector<bool> fixed(n, false);
        for (std::size_t i = 0; i < n; ++i) fixed[i] = box.frozen(i, x[i], g[i]);
        for (std::size_t i = 0; i < n; ++i) q[i] = fixed[i] ? 0.0 : g[i];
        alpha_coef.assign(memory.size(), 0.0);
        for (std::size_t k = memory.size(); k-- > 0;) {
            alpha_coef[k] = memory[k].rho * dot(memory[k].s, q);
            for (std::size_t i = 0; i < n; ++i) q[i] -= alpha_coef[k] * memory[k].y[i];
        }
        if (!memory.empty()) {
            const auto& last = memory.back();
            const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
            for (double& v : q) v *= gamma;
        }
        for (std::size_t k = 0; k < memory.size(); ++k) {
            const double beta = memory[k].rho * dot(memory[k].y, q);
            for (std::size_t i = 0; i < n; ++i) q[i] += memory[k].s[i] * (alpha_coef[k] - beta);
        }
        for (std::size_t i = 0; i < n; ++i) direction[i] = fixed[i] ? 0.0 : -q[i];

        double slope = dot(g, direction);
        if (!(slope < 0.0)) {
            memory.clear();
            for (std::size_t i = 0; i < n; ++i) direction[i] = fixed[i] ? 0.0 : -g[i];
            slope = dot(g, direction);
            if (!(slope < 0.0)) {
                report.reason = TerminationReason::line_search_failure;
                return report;
            }
        }

        // Weak-Wolfe search along the projected path; gradients only for
        // points that already pass the sufficient-decrease test.
        double step = memory.empty() ? std::min(1.0, 1.0 / inf_norm(direction)) : 1.0;
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        bool accepted = false;
        double f_trial = 0.0;
        for (int ls = 0; ls < options.max_line_search; ++ls) {
            bool clipped = false;
            for (std::size_t i = 0; i < n; ++i) {
                const double raw = x[i] + step * direction[i];
                trial[i] = box.clamp(i, raw);
                clipped = clipped || trial[i] != raw;
            }
            f_trial = value(trial);
            ++report.function_evaluations;
            double predicted = 0.0;
            for (std::size_t i = 0; i < n; ++i) predicted += g[i] * (trial[i] - x[i]);
            if (!std::isfinite(f_trial) || f_trial > report.f + kArmijo * predicted) {
                if (lo == 0.0 && std::isfinite(f_trial)) {
                    // Safeguarded quadratic interpolation.
                    const double denom = 2.0 * (f_trial - report.f - slope * step);
                    double next = denom > 0.0 ? -slope * step * step / denom : 0.5 * step;
                    next = std::clamp(next, 0.1 * step, 0.5 * step);
                    hi = step;
                    step = next;
                } else {
                    hi = step;
                    step = 0.5 * (lo + hi);
                }
                continue;
            }
            const double f_check = value_and_gradient(trial, trial_grad);
            ++report.gradient_evaluations;
            ++report.function_evaluations;
            f_trial = f_check;
            if (!clipped && dot(trial_grad, direction) < kCurvature * slope && hi == std::numeric_limits<double>::infinity()) {
                lo = step;
                step *= 2.0;
                continue;
            }
            if (!clipped && dot(trial_grad, direction) < kCurvature * slope) {
                lo = step;
                step = 0.5 * (lo + hi);
                continue;
            }
            accepted = true;
            break;
        }
        if (!accepted) {
            report.reason = TerminationReason::line_search_failure;
            report.iterations = iter - 1;
            return report;
        }

        CorrectionPair pair;
        pair.s.resize(n);
        pair.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            pair.s[i] = trial[i] - x[i];
            pair.y[i] = trial_grad[i] - g[i];
        }
        const double sy = dot(pair.s, pair.y);
        if (sy > std::numeric_limits<double>::epsilon() * dot(pair.y, pair.y)) {
            pair.rho = 1.0 / sy;
            memory.push_back(std::move(pair));
            if (static_cast<int>(memory.size()) > options.history_size) memory.pop_front();
        }

        const double f_prev = report.f;
        x = trial;
        g = trial_grad;
        report.f = f_trial;
        report.iterations = iter;
        report.f_history.push_back(report.f);
        report.projected_gradient_norm = projected_gradient_inf_norm(x, g, options);
        if (const auto reason = check_termination(f_prev, report.f, report.projected_gradient_norm, iter, options)) {
            report.reason = *reason;
            return report;
        }
    }
}

}  // namespace modseq
