#include "asnn/masnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asnn/errors.hpp"

namespace asnn {

namespace {

// Logit given to the preferred branch on a vertex restart; the other
// branches keep weight below exp(-30) each.
constexpr double kVertexLogit = 30.0;

std::vector<double> flatten(const Ensemble& ens) {
    std::vector<double> v;
    v.reserve(ens.branches.size() * kNumParams + ens.logits.size());
    for (const auto& b : ens.branches) {
        const auto a = b.to_array();
        v.insert(v.end(), a.begin(), a.end());
    }
    v.insert(v.end(), ens.logits.begin(), ens.logits.end());
    return v;
}

Ensemble unflatten(const std::vector<double>& v, std::size_t k) {
    Ensemble ens;
    for (std::size_t b = 0; b < k; ++b) {
        std::array<double, kNumParams> a{};
        std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(b * kNumParams), kNumParams, a.begin());
        ens.branches.push_back(AsmParams::from_array(a));
    }
    ens.logits.assign(v.begin() + static_cast<std::ptrdiff_t>(k * kNumParams), v.end());
    return ens;
}

}  // namespace

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw DataError("softmax of an empty vector");
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> w(logits.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < logits.size(); ++k) {
        w[k] = std::exp(logits[k] - top);
        sum += w[k];
    }
    for (double& x : w) x /= sum;
    return w;
}

Ensemble Ensemble::uniform(std::vector<AsmParams> branches) {
    Ensemble e;
    e.logits.assign(branches.size(), 0.0);
    e.branches = std::move(branches);
    return e;
}

std::vector<double> Ensemble::weights() const { return softmax(logits); }

void Ensemble::validate() const {
    if (branches.empty()) throw DataError("ensemble needs at least one branch");
    if (branches.size() != logits.size())
        throw ShapeError("ensemble branch and logit counts differ");
    for (const auto& b : branches) b.validate();
    for (double l : logits)
        if (!std::isfinite(l)) throw DomainError("ensemble logits must be finite");
}

std::vector<AsmParams> InitGrid::branches() const {
    validate();
    std::vector<AsmParams> out;
    for (double tau : tau_values) {
        AsmParams p = shared;
        p.tau = tau;
        out.push_back(p);
    }
    return out;
}

void InitGrid::validate() const {
    if (tau_values.empty()) throw ConfigError("init grid needs at least one tau value");
    for (std::size_t i = 0; i < tau_values.size(); ++i) {
        if (!(tau_values[i] > 0.0)) throw ConfigError("init grid tau values must be positive");
        for (std::size_t j = 0; j < i; ++j)
            if (tau_values[i] == tau_values[j]) throw ConfigError("init grid tau values must be distinct");
    }
}

Field masnn_forward(const Ensemble& ens, const ObservationSet& obs, const Grid& grid,
                    const AsmOptions& opts) {
    ens.validate();
    const auto w = ens.weights();
    Field out(grid, Quantity::speed);
    auto acc = out.values();
    for (std::size_t b = 0; b < ens.branches.size(); ++b) {
        const Field est = asm_estimate(obs, grid, ens.branches[b], opts);
        auto v = est.values();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w[b] * v[k];
    }
    return out;
}

Field MasnnObjective::forward(const Ensemble& ens) const {
    return masnn_forward(ens, base_.observations(), base_.grid(), base_.asm_options());
}

double MasnnObjective::cost(const Ensemble& ens) const {
    return total_cost(forward(ens), base_.target(), base_.mask(), base_.cost_config());
}

std::vector<double> MasnnObjective::gradient(const Ensemble& ens, GradMode mode, double eps) const {
    ens.validate();
    const std::size_t nb = ens.branches.size();
    if (mode == GradMode::finite_difference) {
        std::vector<double> lower, upper;
        const auto lo = param_lower_bounds();
        const auto hi = param_upper_bounds();
        for (std::size_t b = 0; b < nb; ++b) {
            lower.insert(lower.end(), lo.begin(), lo.end());
            upper.insert(upper.end(), hi.begin(), hi.end());
        }
        lower.insert(lower.end(), nb, -std::numeric_limits<double>::infinity());
        upper.insert(upper.end(), nb, std::numeric_limits<double>::infinity());
        return finite_difference_gradient(
            [&](const std::vector<double>& v) { return cost(unflatten(v, nb)); }, flatten(ens), lower,
            upper, eps, {});
    }

    const auto w = ens.weights();
    std::vector<AsmJacobian> jacs;
    jacs.reserve(nb);
    for (const auto& b : ens.branches)
        jacs.push_back(asm_estimate_with_jacobian(base_.observations(), base_.grid(), b,
                                                  base_.asm_options()));
    Field mixed(base_.grid(), Quantity::speed);
    auto acc = mixed.values();
    for (std::size_t b = 0; b < nb; ++b) {
        auto v = jacs[b].estimate.values();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w[b] * v[k];
    }
    const CostGradient cg =
        total_cost_gradient(mixed, base_.target(), base_.mask(), base_.cost_config());

    std::vector<double> grad(nb * kNumParams + nb, 0.0);
    std::vector<double> branch_dot(nb, 0.0);  // <dC/dZ, est_b>
    for (std::size_t b = 0; b < nb; ++b) {
        auto v = jacs[b].estimate.values();
        for (std::size_t k = 0; k < v.size(); ++k) branch_dot[b] += cg.d_est[k] * v[k];
        for (std::size_t p = 0; p < kNumParams; ++p) {
            double s = 0.0;
            const auto& part = jacs[b].partials[p];
            for (std::size_t k = 0; k < part.size(); ++k) s += cg.d_est[k] * part[k];
            grad[b * kNumParams + p] = w[b] * s;
        }
    }
    double mean_dot = 0.0;
    for (std::size_t b = 0; b < nb; ++b) mean_dot += w[b] * branch_dot[b];
    for (std::size_t b = 0; b < nb; ++b) grad[nb * kNumParams + b] = w[b] * (branch_dot[b] - mean_dot);
    return grad;
}

MasnnReport train_masnn(const ObservationSet& obs, const Grid& grid, const CostConfig& cfg,
                        const TrainConfig& tcfg, const InitGrid& inits) {
    const AsnnObjective objective(obs, grid, cfg, tcfg.asm_options);
    return train_masnn(objective, tcfg, inits.branches());
}

namespace {

TrainReport run_joint(const MasnnObjective& objective, const TrainConfig& tcfg,
                      const Ensemble& start, const std::vector<double>& scales,
                      Ensemble& result) {
    const std::size_t nb = start.branches.size();
    const auto lo = param_lower_bounds();
    const auto hi = param_upper_bounds();
    const auto frozen = tcfg.frozen_mask();

    DescentProblem problem;
    problem.start = flatten(start);
    problem.scale = scales;
    for (std::size_t b = 0; b < nb; ++b) {
        problem.lower.insert(problem.lower.end(), lo.begin(), lo.end());
        problem.upper.insert(problem.upper.end(), hi.begin(), hi.end());
        problem.frozen.insert(problem.frozen.end(), frozen.begin(), frozen.end());
    }
    problem.lower.insert(problem.lower.end(), nb, -std::numeric_limits<double>::infinity());
    problem.upper.insert(problem.upper.end(), nb, std::numeric_limits<double>::infinity());
    problem.frozen.insert(problem.frozen.end(), nb, false);
    problem.cost = [&](const std::vector<double>& v) { return objective.cost(unflatten(v, nb)); };
    problem.gradient = [&](const std::vector<double>& v) {
        return objective.gradient(unflatten(v, nb), tcfg.grad_mode, tcfg.fd_epsilon);
    };

    DescentSettings settings;
    settings.max_epochs = tcfg.max_epochs;
    settings.step_size = tcfg.step_size;
    settings.tolerance = tcfg.tolerance;
    DescentResult r = projected_descent(problem, settings);

    result = unflatten(r.x, nb);
    TrainReport report;
    report.cost_history = std::move(r.cost_history);
    report.final_params = result.branches[static_cast<std::size_t>(
        std::max_element(result.logits.begin(), result.logits.end()) - result.logits.begin())];
    report.epochs_run = r.epochs_run;
    report.stop_reason = r.stop_reason;
    return report;
}

}  // namespace

MasnnReport train_masnn(const AsnnObjective& objective, const TrainConfig& tcfg,
                        const std::vector<AsmParams>& inits) {
    tcfg.validate();
    if (inits.empty()) throw ConfigError("MASNN needs at least one initialization");
    for (const auto& p : inits) p.validate();

    const MasnnObjective joint(objective);
    const std::size_t nb = inits.size();

    std::vector<double> scales;
    for (const auto& p : inits)
        for (double v : p.to_array()) scales.push_back(std::max(std::abs(v), kParamFloor));
    scales.insert(scales.end(), nb, 1.0);

    MasnnReport out;
    out.joint = run_joint(joint, tcfg, Ensemble::uniform(inits), scales, out.ensemble);

    for (const auto& p : inits) out.single_branch.push_back(train(objective, tcfg, p));
    std::size_t best = 0;
    for (std::size_t b = 1; b < nb; ++b)
        if (out.single_branch[b].cost_history.back() < out.single_branch[best].cost_history.back())
            best = b;

    const double best_single = out.single_branch[best].cost_history.back();
    if (out.joint.cost_history.back() > best_single) {
        Ensemble vertex;
        for (const auto& r : out.single_branch) vertex.branches.push_back(r.final_params);
        vertex.logits.assign(nb, 0.0);
        vertex.logits[best] = kVertexLogit;
        Ensemble restarted;
        TrainReport second = run_joint(joint, tcfg, vertex, scales, restarted);
        if (second.cost_history.back() < out.joint.cost_history.back()) {
            out.joint = std::move(second);
            out.ensemble = std::move(restarted);
            out.vertex_restart = true;
        }
    }
    return out;
}

}  // namespace asnn
