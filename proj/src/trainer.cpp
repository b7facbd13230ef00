#include "asnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asnn/errors.hpp"

namespace asnn {

std::string to_string(GradMode m) {
    return m == GradMode::finite_difference ? "finite_difference" : "reverse_mode";
}

std::array<bool, kNumParams> TrainConfig::frozen_mask() const {
    std::array<bool, kNumParams> mask{};
    if (freeze_smoothing || freeze_wave_speeds) mask[kCFree] = mask[kCCong] = true;
    if (freeze_smoothing) mask[kSigma] = mask[kTau] = true;
    return mask;
}

void TrainConfig::validate() const {
    if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
    if (!(step_size > 0.0)) throw ConfigError("step_size must be positive");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be non-negative");
    if (!(fd_epsilon > 0.0)) throw ConfigError("fd_epsilon must be positive");
}

std::array<double, kNumParams> param_lower_bounds() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {kParamFloor, -inf, kParamFloor, kParamFloor, kParamFloor, kParamFloor};
}

std::array<double, kNumParams> param_upper_bounds() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {inf, -kParamFloor, inf, inf, inf, inf};
}

AsnnObjective::AsnnObjective(const ObservationSet& obs, const Grid& grid, CostConfig cfg,
                             AsmOptions opts)
    : obs_(obs), grid_(grid), cfg_(std::move(cfg)), opts_(opts) {
    Rasterized r = rasterize(obs, grid);
    target_ = std::move(r.field);
    mask_ = std::move(r.mask);
}

AsnnObjective::AsnnObjective(const ObservationSet& obs, const Grid& grid, Field truth_on_mask,
                             Mask mask, CostConfig cfg, AsmOptions opts)
    : obs_(obs),
      grid_(grid),
      target_(std::move(truth_on_mask)),
      mask_(std::move(mask)),
      cfg_(std::move(cfg)),
      opts_(opts) {
    require_same_grid(grid_, target_.grid(), "objective target");
    require_same_grid(grid_, mask_.grid(), "objective mask");
    if (mask_.count() == 0) throw DataError("objective mask is empty");
}

Field AsnnObjective::forward(const AsmParams& params) const {
    return asm_estimate(obs_, grid_, params, opts_);
}

double AsnnObjective::cost(const AsmParams& params) const {
    return total_cost(forward(params), target_, mask_, cfg_);
}

std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x,
    const std::vector<double>& lower, const std::vector<double>& upper, double eps,
    const std::vector<bool>& skip, std::vector<std::size_t>* one_sided) {
    if (!(eps > 0.0)) throw DomainError("finite-difference epsilon must be positive");
    std::vector<double> g(x.size(), 0.0);
    std::optional<double> f0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!skip.empty() && skip[i]) continue;
        const double h = std::max(eps * std::abs(x[i]), 1e-7);
        std::vector<double> xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const bool up_ok = xp[i] <= upper[i];
        const bool down_ok = xm[i] >= lower[i];
        if (up_ok && down_ok) {
            g[i] = (f(xp) - f(xm)) / (2.0 * h);
            continue;
        }
        if (one_sided) one_sided->push_back(i);
        if (!f0) f0 = f(x);
        g[i] = up_ok ? (f(xp) - *f0) / h : (*f0 - f(xm)) / h;
    }
    return g;
}

Gradient AsnnObjective::gradient(const AsmParams& params, GradMode mode, double eps) const {
    params.validate();
    Gradient out;
    if (mode == GradMode::reverse_mode) {
        const AsmJacobian jac = asm_estimate_with_jacobian(obs_, grid_, params, opts_);
        const CostGradient cg = total_cost_gradient(jac.estimate, target_, mask_, cfg_);
        for (std::size_t p = 0; p < kNumParams; ++p) {
            double s = 0.0;
            const auto& part = jac.partials[p];
            for (std::size_t k = 0; k < part.size(); ++k) s += cg.d_est[k] * part[k];
            out.values[p] = s;
        }
        return out;
    }

    const auto lo = param_lower_bounds();
    const auto hi = param_upper_bounds();
    const auto x = params.to_array();
    std::vector<std::size_t> one_sided;
    const auto g = finite_difference_gradient(
        [this](const std::vector<double>& v) {
            std::array<double, kNumParams> a{};
            std::copy(v.begin(), v.end(), a.begin());
            return cost(AsmParams::from_array(a));
        },
        std::vector<double>(x.begin(), x.end()), std::vector<double>(lo.begin(), lo.end()),
        std::vector<double>(hi.begin(), hi.end()), eps, {}, &one_sided);
    std::copy(g.begin(), g.end(), out.values.begin());
    for (std::size_t i : one_sided)
        out.warnings.push_back("one-sided difference for " + std::string(kParamNames[i]) +
                               " at its domain boundary");
    return out;
}

Gradient cost_gradient(const ObservationSet& obs, const Grid& grid, const AsmParams& params,
                       const Field& truth_on_mask, const Mask& mask, const CostConfig& cfg,
                       GradMode mode, double eps, const AsmOptions& opts) {
    const AsnnObjective objective(obs, grid, truth_on_mask, mask, cfg, opts);
    return objective.gradient(params, mode, eps);
}

TrainReport train(const ObservationSet& obs, const Grid& grid, const CostConfig& cfg,
                  const TrainConfig& tcfg, const AsmParams& init) {
    const AsnnObjective objective(obs, grid, cfg, tcfg.asm_options);
    return train(objective, tcfg, init);
}

TrainReport train(const AsnnObjective& objective, const TrainConfig& tcfg, const AsmParams& init) {
    tcfg.validate();
    init.validate();
    const auto x0 = init.to_array();
    const auto lo = param_lower_bounds();
    const auto hi = param_upper_bounds();
    const auto frozen = tcfg.frozen_mask();

    TrainReport report;
    auto to_params = [](const std::vector<double>& v) {
        std::array<double, kNumParams> a{};
        std::copy(v.begin(), v.end(), a.begin());
        return AsmParams::from_array(a);
    };

    DescentProblem problem;
    problem.start.assign(x0.begin(), x0.end());
    problem.lower.assign(lo.begin(), lo.end());
    problem.upper.assign(hi.begin(), hi.end());
    problem.frozen.assign(frozen.begin(), frozen.end());
    for (double v : x0) problem.scale.push_back(std::max(std::abs(v), kParamFloor));
    problem.cost = [&](const std::vector<double>& v) { return objective.cost(to_params(v)); };
    problem.gradient = [&](const std::vector<double>& v) {
        Gradient g = objective.gradient(to_params(v), tcfg.grad_mode, tcfg.fd_epsilon);
        for (auto& w : g.warnings)
            if (std::find(report.warnings.begin(), report.warnings.end(), w) == report.warnings.end())
                report.warnings.push_back(std::move(w));
        return std::vector<double>(g.values.begin(), g.values.end());
    };

    DescentSettings settings;
    settings.max_epochs = tcfg.max_epochs;
    settings.step_size = tcfg.step_size;
    settings.tolerance = tcfg.tolerance;

    DescentResult result = projected_descent(problem, settings);
    report.cost_history = std::move(result.cost_history);
    report.final_params = to_params(result.x);
    report.epochs_run = result.epochs_run;
    report.stop_reason = result.stop_reason;
    return report;
}

}  // namespace asnn
