#ifndef ASNN_TRAINER_HPP
#define ASNN_TRAINER_HPP

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asnn/asm.hpp"
#include "asnn/cost.hpp"
#include "asnn/grid.hpp"
#include "asnn/optimizer.hpp"

namespace asnn {

enum class GradMode { finite_difference, reverse_mode };

struct TrainConfig {
    std::size_t max_epochs = 200;
    /// Initial step in scaled parameter units (each parameter divided by
    /// the magnitude of its initial value).
    double step_size = 0.05;
    GradMode grad_mode = GradMode::finite_difference;
    /// Keeps c_free, c_cong, sigma and tau at their initial values.
    bool freeze_smoothing = false;
    /// Keeps only c_free and c_cong fixed.
    bool freeze_wave_speeds = false;
    double tolerance = 1e-8;
    double fd_epsilon = 1e-4;
    AsmOptions asm_options;

    std::array<bool, kNumParams> frozen_mask() const;
    void validate() const;
};

struct TrainReport {
    std::vector<double> cost_history;
    AsmParams final_params;
    std::size_t epochs_run = 0;
    StopReason stop_reason = StopReason::max_epochs;
    std::vector<std::string> warnings;
};

struct Gradient {
    std::array<double, kNumParams> values{};
    std::vector<std::string> warnings;
};

/// Smallest magnitude any parameter may take after projection (SI units).
inline constexpr double kParamFloor = 1e-6;

/**
 * Training objective: the total cost of the ASM estimate against the
 * rasterized observations on the observed cells.
 */
class AsnnObjective {
public:
    AsnnObjective(const ObservationSet& obs, const Grid& grid, CostConfig cfg,
                  AsmOptions opts = {});
    AsnnObjective(const ObservationSet& obs, const Grid& grid, Field truth_on_mask, Mask mask,
                  CostConfig cfg, AsmOptions opts = {});

    /// Forward pass of the network; identical to asm_estimate().
    Field forward(const AsmParams& params) const;
    double cost(const AsmParams& params) const;
    Gradient gradient(const AsmParams& params, GradMode mode, double eps) const;

    const ObservationSet& observations() const { return obs_; }
    const Grid& grid() const { return grid_; }
    const Field& target() const { return target_; }
    const Mask& mask() const { return mask_; }
    const CostConfig& cost_config() const { return cfg_; }
    const AsmOptions& asm_options() const { return opts_; }

private:
    ObservationSet obs_;
    Grid grid_;
    Field target_;
    Mask mask_;
    CostConfig cfg_;
    AsmOptions opts_;
};

/// Gradient of total_cost(asm_estimate(params), truth_on_mask) in the order
/// (c_free, c_cong, v_thr, dv, sigma, tau).
Gradient cost_gradient(const ObservationSet& obs, const Grid& grid, const AsmParams& params,
                       const Field& truth_on_mask, const Mask& mask, const CostConfig& cfg,
                       GradMode mode, double eps, const AsmOptions& opts = {});

/// Central finite differences of an arbitrary scalar function. Coordinates
/// whose stencil would leave [lower, upper] fall back to a one-sided
/// difference and are reported through `one_sided`.
std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x,
    const std::vector<double>& lower, const std::vector<double>& upper, double eps,
    const std::vector<bool>& skip, std::vector<std::size_t>* one_sided = nullptr);

/// Domain bounds used for projection: c_free >= floor, c_cong <= -floor,
/// all other parameters >= floor.
std::array<double, kNumParams> param_lower_bounds();
std::array<double, kNumParams> param_upper_bounds();

TrainReport train(const ObservationSet& obs, const Grid& grid, const CostConfig& cfg,
                  const TrainConfig& tcfg, const AsmParams& init);

TrainReport train(const AsnnObjective& objective, const TrainConfig& tcfg, const AsmParams& init);

std::string to_string(GradMode m);

}  // namespace asnn

#endif  // ASNN_TRAINER_HPP
