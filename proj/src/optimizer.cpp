#include "asnn/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "asnn/errors.hpp"

namespace asnn {

std::string to_string(StopReason r) {
    return r == StopReason::converged ? "converged" : "max_epochs";
}

DescentResult projected_descent(const DescentProblem& p, const DescentSettings& s) {
    const std::size_t n = p.start.size();
    if (p.scale.size() != n || p.lower.size() != n || p.upper.size() != n || p.frozen.size() != n)
        throw ShapeError("descent problem vectors have inconsistent sizes");
    if (s.max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
    if (!(s.step_size > 0.0)) throw ConfigError("step_size must be positive");
    if (!(s.tolerance >= 0.0)) throw ConfigError("tolerance must be non-negative");

    DescentResult out;
    out.x = p.start;
    double cost = p.cost(out.x);
    if (!std::isfinite(cost)) throw DivergenceError("cost is not finite at the starting point");
    out.cost_history.push_back(cost);

    double step = s.step_size;
    for (std::size_t epoch = 1; epoch <= s.max_epochs; ++epoch) {
        out.epochs_run = epoch;
        std::vector<double> g = p.gradient(out.x);
        bool moving = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (p.frozen[i] || !std::isfinite(g[i])) g[i] = 0.0;
            moving = moving || g[i] != 0.0;
        }
        if (!moving) {
            out.cost_history.push_back(cost);
            out.stop_reason = StopReason::converged;
            return out;
        }

        bool accepted = false;
        std::vector<double> trial(n);
        double trial_cost = cost;
        for (std::size_t h = 0; h <= s.max_halvings; ++h, step *= 0.5) {
            for (std::size_t i = 0; i < n; ++i) {
                const double moved = out.x[i] - step * p.scale[i] * p.scale[i] * g[i];
                trial[i] = p.frozen[i] ? out.x[i] : std::clamp(moved, p.lower[i], p.upper[i]);
            }
            trial_cost = p.cost(trial);
            if (std::isfinite(trial_cost) && trial_cost < cost) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.cost_history.push_back(cost);
            out.stop_reason = StopReason::converged;
            return out;
        }

        const double decrease = cost - trial_cost;
        out.x = trial;
        cost = trial_cost;
        out.cost_history.push_back(cost);
        step *= 2.0;
        if (decrease < s.tolerance) {
            out.stop_reason = StopReason::converged;
            return out;
        }
    }
    out.stop_reason = StopReason::max_epochs;
    return out;
}

}  // namespace asnn
