#ifndef ASNN_OPTIMIZER_HPP
#define ASNN_OPTIMIZER_HPP

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace asnn {

enum class StopReason { converged, max_epochs };

std::string to_string(StopReason r);

/// Box-constrained objective with per-coordinate scale used to precondition
/// the descent direction (steps are taken in x_i / scale_i).
struct DescentProblem {
    std::vector<double> start;
    std::vector<double> scale;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<bool> frozen;
    std::function<double(const std::vector<double>&)> cost;
    std::function<std::vector<double>(const std::vector<double>&)> gradient;
};

struct DescentSettings {
    std::size_t max_epochs = 200;
    double step_size = 0.05;
    double tolerance = 1e-8;
    std::size_t max_halvings = 20;
};

struct DescentResult {
    std::vector<double> x;
    /// Entry 0 is the starting cost, then one entry per epoch.
    std::vector<double> cost_history;
    std::size_t epochs_run = 0;
    StopReason stop_reason = StopReason::max_epochs;
};

/**
 * Projected steepest descent with backtracking: each epoch halves the step
 * until the cost strictly decreases (at most `max_halvings` times), then
 * doubles it for the next epoch. Stops as converged when no halving helps
 * or the accepted decrease is below `tolerance`. The cost history is
 * non-increasing by construction.
 *
 * Throws DivergenceError when the cost at the starting point is not finite.
 */
DescentResult projected_descent(const DescentProblem& problem, const DescentSettings& settings);

}  // namespace asnn

#endif  // ASNN_OPTIMIZER_HPP
