#ifndef ASNN_CONFIG_HPP
#define ASNN_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "asnn/asm.hpp"
#include "asnn/cost.hpp"
#include "asnn/data_io.hpp"
#include "asnn/lwr.hpp"
#include "asnn/masnn.hpp"
#include "asnn/trainer.hpp"

namespace asnn {

/// Initial condition and discretization of the synthetic LWR run.
struct SimulationConfig {
    enum class Preset { jam_pocket, free_flow };
    Preset preset = Preset::jam_pocket;
    std::size_t nx = 100;
    double dx = 100.0;  // m
    double dt = 3.0;    // s
    std::size_t steps = 300;
    double background_density = per_km(20.0);  // veh/m
    double pocket_start = 5000.0;              // m
    double pocket_length = 1000.0;             // m
    double pocket_density = per_km(120.0);     // veh/m
    Boundary boundary = Boundary::open(per_km(20.0), 0.0);

    std::vector<double> initial_profile() const;
    Grid grid() const;
};

/**
 * Every tunable of the pipeline. Speeds in the JSON file are given in km/h
 * and densities in veh/km (keys carry the unit); the struct is SI.
 */
struct RunConfig {
    std::optional<Grid> grid;  // defaults to the simulation grid
    SimulationConfig simulation;
    FundamentalDiagram fd = FundamentalDiagram::standard();
    /// Explicit ASM parameters; unset smoothing widths follow the sampling
    /// layout (half the detector spacing, half the sampling period).
    double c_free = kmh(80.0);
    double c_cong = kmh(-15.0);
    double v_thr = kmh(60.0);
    double dv = kmh(20.0);
    std::optional<double> sigma;
    std::optional<double> tau;
    CostConfig cost;
    TrainConfig train = default_train();
    SamplingSpec sampling = default_sampling();
    /// Ensemble initializations: tau list plus shared v_thr/dv.
    std::vector<double> ensemble_tau = {2.5, 5.0, 7.5, 10.0, 12.5};
    double ensemble_v_thr = kmh(1.0);
    double ensemble_dv = kmh(1.0);
    std::optional<double> ensemble_sigma;
    bool ensemble_freeze_wave_speeds = true;
    std::size_t ensemble_max_epochs = 40;
    /// Training settings for the ensemble (smoothing layers trainable).
    TrainConfig ensemble_train() const;
    int threads = 0;  // 0 = library default

    Grid resolved_grid() const;
    /// ASM parameters with smoothing defaults filled in for `grid`.
    AsmParams asm_params(const Grid& grid) const;
    InitGrid ensemble_inits(const Grid& grid) const;
    double sampling_period(const Grid& grid) const;
    double detector_spacing(const Grid& grid) const;

    static SamplingSpec default_sampling();
    /// Frozen smoothing layers, reverse-mode gradients, kernel cutoff 30.
    static TrainConfig default_train();
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// The default configuration as JSON, with every key present.
nlohmann::json default_config_json();

/// Merges `user` over the defaults; unknown keys are rejected.
nlohmann::json merge_config_json(const nlohmann::json& user);

/// Reads a JSON config file (merged over defaults).
nlohmann::json load_config_json(const std::filesystem::path& path);

/// Applies `section.key=value`; value is parsed as JSON when possible,
/// otherwise taken as a string. Unknown keys are rejected.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace asnn

#endif  // ASNN_CONFIG_HPP
