#pragma once

// Limited-memory BFGS with optional box constraints.
//
// Bounds are handled by an active-set projection: variables sitting on a
// bound with the gradient pushing outward are frozen for the step, the
// quasi-Newton direction is computed on the remaining ones, and the line
// search runs along the projected path P(x + a d). Without bounds this is
// plain L-BFGS with a weak-Wolfe line search.
//
// Termination follows the two standard tests
//     (f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) <= tol_f
//     || proj grad ||_inf                         <= tol_pg
// where proj grad_i = clamp(x_i - g_i, lo_i, hi_i) - x_i.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace modseq {

enum class TerminationReason { tol_J, tol_gradJ, max_iter, line_search_failure };

std::string to_string(TerminationReason reason);

/// Value at x; writes the gradient into `grad`.
using ValueAndGradient = std::function<double(std::span<const double> x, std::span<double> grad)>;
/// Value only (used for trial points that may be rejected).
using ValueOnly = std::function<double(std::span<const double> x)>;

struct LbfgsOptions {
    double tol_f = 2.2e-6;
    double tol_pg = 2.2e-6;
    int max_iterations = 15000;
    int history_size = 10;
    int max_line_search = 40;
    /// Empty means unbounded. Otherwise one entry per variable.
    std::vector<double> lower;
    std::vector<double> upper;
};

struct LbfgsReport {
    std::vector<double> x;
    double f = 0.0;
    std::vector<double> gradient;
    std::vector<double> f_history;  // f at x0 followed by f after each iteration
    int iterations = 0;
    int function_evaluations = 0;
    int gradient_evaluations = 0;
    double projected_gradient_norm = 0.0;
    TerminationReason reason = TerminationReason::max_iter;
};

/// The termination rule on its own, so it can be checked against scripted
/// sequences. Returns nothing when the iteration should continue.
std::optional<TerminationReason> check_termination(double f_prev, double f_next, double pg_inf, int iteration,
                                                   const LbfgsOptions& options);

double projected_gradient_inf_norm(std::span<const double> x, std::span<const double> grad,
                                   const LbfgsOptions& options);

LbfgsReport minimize_lbfgsb(const ValueAndGradient& value_and_gradient, const ValueOnly& value,
                            std::vector<double> x0, const LbfgsOptions& options);

}  // namespace modseq
