#include "asnn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "asnn/errors.hpp"

namespace asnn {

using nlohmann::json;

namespace {

double to_kmh(double ms) { return convert_speed(ms, SpeedUnit::ms, SpeedUnit::kmh); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

void merge_checked(json& base, const json& patch, const std::string& path) {
    if (!patch.is_object()) throw ConfigError("config section '" + path + "' must be an object");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
        json& target = base[it.key()];
        if (target.is_object() && it->is_object())
            merge_checked(target, *it, key);
        else
            target = *it;
    }
}

Boundary::Kind boundary_kind(const std::string& s) {
    if (s == "open") return Boundary::Kind::open;
    if (s == "closed") return Boundary::Kind::closed;
    if (s == "periodic") return Boundary::Kind::periodic;
    throw ConfigError("unknown boundary '" + s + "'");
}

std::string boundary_name(Boundary::Kind k) {
    switch (k) {
        case Boundary::Kind::open: return "open";
        case Boundary::Kind::closed: return "closed";
        case Boundary::Kind::periodic: return "periodic";
    }
    return "closed";
}

template <class E>
E pick(const std::string& value, std::initializer_list<std::pair<const char*, E>> choices,
       const char* what) {
    for (const auto& [name, e] : choices)
        if (value == name) return e;
    throw ConfigError(std::string("unknown ") + what + " '" + value + "'");
}

template <class E>
std::string name_of(E value, std::initializer_list<std::pair<const char*, E>> choices) {
    for (const auto& [name, e] : choices)
        if (value == e) return name;
    return {};
}

const std::initializer_list<std::pair<const char*, CostKind>> kCostKinds = {
    {"convolution", CostKind::convolution}, {"physics", CostKind::physics}};
const std::initializer_list<std::pair<const char*, GradMode>> kGradModes = {
    {"finite_difference", GradMode::finite_difference}, {"reverse_mode", GradMode::reverse_mode}};
const std::initializer_list<std::pair<const char*, SamplingMode>> kSamplingModes = {
    {"detectors", SamplingMode::detectors},
    {"floating_cars", SamplingMode::floating_cars},
    {"hybrid", SamplingMode::hybrid}};
const std::initializer_list<std::pair<const char*, SimulationConfig::Preset>> kPresets = {
    {"jam_pocket", SimulationConfig::Preset::jam_pocket},
    {"free_flow", SimulationConfig::Preset::free_flow}};
const std::initializer_list<std::pair<const char*, ResidualForm>> kResidualForms = {
    {"conservative", ResidualForm::conservative}, {"literal", ResidualForm::literal}};

}  // namespace

std::vector<double> SimulationConfig::initial_profile() const {
    std::vector<double> rho(nx, background_density);
    if (preset == Preset::jam_pocket) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double xc = (static_cast<double>(i) + 0.5) * dx;
            if (xc >= pocket_start && xc < pocket_start + pocket_length) rho[i] = pocket_density;
        }
    }
    return rho;
}

Grid SimulationConfig::grid() const { return Grid(0.0, dx, nx, 0.0, dt, steps + 1); }

Grid RunConfig::resolved_grid() const { return grid ? *grid : simulation.grid(); }

SamplingSpec RunConfig::default_sampling() {
    SamplingSpec s;
    s.detector_period = 15.0;
    return s;
}

TrainConfig RunConfig::default_train() {
    TrainConfig t;
    t.freeze_smoothing = true;
    t.grad_mode = GradMode::reverse_mode;
    t.asm_options.cutoff = 30.0;
    return t;
}

TrainConfig RunConfig::ensemble_train() const {
    TrainConfig t = train;
    t.freeze_smoothing = false;
    t.freeze_wave_speeds = ensemble_freeze_wave_speeds;
    t.max_epochs = ensemble_max_epochs;
    return t;
}

double RunConfig::sampling_period(const Grid& g) const {
    return sampling.detector_period > 0.0 ? sampling.detector_period : g.dt;
}

double RunConfig::detector_spacing(const Grid& g) const {
    auto pos = detector_positions(g, sampling);
    if (pos.size() < 2) return g.x_end() - g.x0;
    std::sort(pos.begin(), pos.end());
    return (pos.back() - pos.front()) / static_cast<double>(pos.size() - 1);
}

AsmParams RunConfig::asm_params(const Grid& g) const {
    AsmParams p{c_free, c_cong, v_thr, dv, 0.0, 0.0};
    p.sigma = sigma ? *sigma : detector_spacing(g) / 2.0;
    p.tau = tau ? *tau : sampling_period(g) / 2.0;
    p.validate();
    return p;
}

InitGrid RunConfig::ensemble_inits(const Grid& g) const {
    InitGrid ig;
    ig.tau_values = ensemble_tau;
    ig.shared = AsmParams{c_free, c_cong, ensemble_v_thr, ensemble_dv,
                          ensemble_sigma ? *ensemble_sigma : detector_spacing(g) / 2.0, 1.0};
    ig.validate();
    return ig;
}

json default_config_json() { return RunConfig{}.to_json(); }

json RunConfig::to_json() const {
    json j;
    if (grid)
        j["grid"] = {{"x0_m", grid->x0}, {"dx_m", grid->dx}, {"nx", grid->nx},
                     {"t0_s", grid->t0}, {"dt_s", grid->dt}, {"nt", grid->nt}};
    else
        j["grid"] = nullptr;
    const auto& s = simulation;
    j["simulation"] = {{"preset", name_of(s.preset, kPresets)},
                       {"nx", s.nx},
                       {"dx_m", s.dx},
                       {"dt_s", s.dt},
                       {"steps", s.steps},
                       {"background_density_veh_per_km", s.background_density * 1000.0},
                       {"pocket_start_m", s.pocket_start},
                       {"pocket_length_m", s.pocket_length},
                       {"pocket_density_veh_per_km", s.pocket_density * 1000.0},
                       {"boundary", boundary_name(s.boundary.kind)},
                       {"inflow_density_veh_per_km", s.boundary.inflow_density * 1000.0},
                       {"outflow_density_veh_per_km", s.boundary.outflow_density * 1000.0}};
    j["fundamental_diagram"] = {{"v_f_kmh", to_kmh(fd.v_f())},
                                {"rho_jam_veh_per_km", fd.rho_jam() * 1000.0},
                                {"c_cong_kmh", to_kmh(fd.c_cong())}};
    j["asm"] = {{"c_free_kmh", to_kmh(c_free)},
                {"c_cong_kmh", to_kmh(c_cong)},
                {"v_thr_kmh", to_kmh(v_thr)},
                {"dv_kmh", to_kmh(dv)},
                {"sigma_m", optional_number(sigma)},
                {"tau_s", optional_number(tau)},
                {"cutoff", optional_number(train.asm_options.cutoff)}};
    j["cost"] = {{"lambda", cost.lambda},
                 {"kind", name_of(cost.kind, kCostKinds)},
                 {"kernel",
                  {{"rows", cost.kernel.rows()},
                   {"cols", cost.kernel.cols()},
                   {"weights", cost.kernel.weights()}}},
                 {"residual_form", name_of(cost.residual_form, kResidualForms)}};
    j["train"] = {{"max_epochs", train.max_epochs},
                  {"step_size", train.step_size},
                  {"grad_mode", name_of(train.grad_mode, kGradModes)},
                  {"freeze_smoothing", train.freeze_smoothing},
                  {"freeze_wave_speeds", train.freeze_wave_speeds},
                  {"tolerance", train.tolerance},
                  {"fd_epsilon", train.fd_epsilon}};
    j["sampling"] = {{"mode", name_of(sampling.mode, kSamplingModes)},
                     {"detector_positions_m", sampling.detector_positions},
                     {"detector_count", sampling.detector_count},
                     {"detector_period_s", sampling.detector_period},
                     {"fcd_fraction", sampling.fcd_fraction},
                     {"seed", sampling.seed}};
    j["ensemble"] = {{"tau_s", ensemble_tau},
                     {"v_thr_kmh", to_kmh(ensemble_v_thr)},
                     {"dv_kmh", to_kmh(ensemble_dv)},
                     {"sigma_m", optional_number(ensemble_sigma)},
                     {"freeze_wave_speeds", ensemble_freeze_wave_speeds},
                     {"max_epochs", ensemble_max_epochs}};
    j["threads"] = threads;
    return j;
}

RunConfig RunConfig::from_json(const json& user) {
    json j = default_config_json();
    merge_checked(j, user, "");
    RunConfig c;
    try {
        if (!j["grid"].is_null()) {
            const auto& g = j["grid"];
            for (const char* k : {"x0_m", "dx_m", "nx", "t0_s", "dt_s", "nt"})
                if (!g.contains(k)) throw ConfigError(std::string("grid lacks '") + k + "'");
            c.grid = Grid(g["x0_m"].get<double>(), g["dx_m"].get<double>(), g["nx"].get<std::size_t>(),
                          g["t0_s"].get<double>(), g["dt_s"].get<double>(), g["nt"].get<std::size_t>());
        }
        const auto& s = j["simulation"];
        c.simulation.preset = pick(s["preset"].get<std::string>(), kPresets, "simulation preset");
        c.simulation.nx = s["nx"].get<std::size_t>();
        c.simulation.dx = s["dx_m"].get<double>();
        c.simulation.dt = s["dt_s"].get<double>();
        c.simulation.steps = s["steps"].get<std::size_t>();
        c.simulation.background_density = per_km(s["background_density_veh_per_km"].get<double>());
        c.simulation.pocket_start = s["pocket_start_m"].get<double>();
        c.simulation.pocket_length = s["pocket_length_m"].get<double>();
        c.simulation.pocket_density = per_km(s["pocket_density_veh_per_km"].get<double>());
        c.simulation.boundary.kind = boundary_kind(s["boundary"].get<std::string>());
        c.simulation.boundary.inflow_density = per_km(s["inflow_density_veh_per_km"].get<double>());
        c.simulation.boundary.outflow_density = per_km(s["outflow_density_veh_per_km"].get<double>());

        const auto& f = j["fundamental_diagram"];
        c.fd = FundamentalDiagram(kmh(f["v_f_kmh"].get<double>()),
                                  per_km(f["rho_jam_veh_per_km"].get<double>()),
                                  kmh(f["c_cong_kmh"].get<double>()));

        const auto& a = j["asm"];
        c.c_free = kmh(a["c_free_kmh"].get<double>());
        c.c_cong = kmh(a["c_cong_kmh"].get<double>());
        c.v_thr = kmh(a["v_thr_kmh"].get<double>());
        c.dv = kmh(a["dv_kmh"].get<double>());
        c.sigma = read_optional(a, "sigma_m");
        c.tau = read_optional(a, "tau_s");
        c.train.asm_options.cutoff = read_optional(a, "cutoff");

        const auto& k = j["cost"];
        c.cost.lambda = k["lambda"].get<double>();
        if (!(c.cost.lambda >= 0.0)) throw ConfigError("cost.lambda must be non-negative");
        c.cost.kind = pick(k["kind"].get<std::string>(), kCostKinds, "cost kind");
        c.cost.kernel = ConvKernel(k["kernel"]["rows"].get<std::size_t>(),
                                   k["kernel"]["cols"].get<std::size_t>(),
                                   k["kernel"]["weights"].get<std::vector<double>>());
        c.cost.residual_form = pick(k["residual_form"].get<std::string>(), kResidualForms, "residual form");
        c.cost.fd = c.fd;

        const auto& t = j["train"];
        c.train.max_epochs = t["max_epochs"].get<std::size_t>();
        c.train.step_size = t["step_size"].get<double>();
        c.train.grad_mode = pick(t["grad_mode"].get<std::string>(), kGradModes, "grad mode");
        c.train.freeze_smoothing = t["freeze_smoothing"].get<bool>();
        c.train.freeze_wave_speeds = t["freeze_wave_speeds"].get<bool>();
        c.train.tolerance = t["tolerance"].get<double>();
        c.train.fd_epsilon = t["fd_epsilon"].get<double>();
        c.train.validate();

        const auto& p = j["sampling"];
        c.sampling.mode = pick(p["mode"].get<std::string>(), kSamplingModes, "sampling mode");
        c.sampling.detector_positions = p["detector_positions_m"].get<std::vector<double>>();
        c.sampling.detector_count = p["detector_count"].get<std::size_t>();
        c.sampling.detector_period = p["detector_period_s"].get<double>();
        c.sampling.fcd_fraction = p["fcd_fraction"].get<double>();
        c.sampling.seed = p["seed"].get<std::uint64_t>();
        if (!(c.sampling.fcd_fraction > 0.0 && c.sampling.fcd_fraction <= 1.0))
            throw ConfigError("sampling.fcd_fraction must lie in (0, 1]");

        const auto& e = j["ensemble"];
        c.ensemble_tau = e["tau_s"].get<std::vector<double>>();
        c.ensemble_v_thr = kmh(e["v_thr_kmh"].get<double>());
        c.ensemble_dv = kmh(e["dv_kmh"].get<double>());
        c.ensemble_sigma = read_optional(e, "sigma_m");
        c.ensemble_freeze_wave_speeds = e["freeze_wave_speeds"].get<bool>();
        c.ensemble_max_epochs = e["max_epochs"].get<std::size_t>();
        if (c.ensemble_max_epochs == 0) throw ConfigError("ensemble.max_epochs must be positive");

        c.threads = j["threads"].get<int>();
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("invalid config value: ") + ex.what());
    } catch (const DomainError& ex) {
        throw ConfigError(ex.what());
    }
    return c;
}

json load_config_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    json user;
    try {
        user = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return merge_config_json(user);
}

json merge_config_json(const json& user) {
    json j = default_config_json();
    merge_checked(j, user, "");
    return j;
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json patch = value;
    std::string rest = path;
    std::vector<std::string> keys;
    for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
        keys.push_back(rest.substr(0, pos));
    keys.push_back(rest);
    for (auto it = keys.rbegin(); it != keys.rend(); ++it) patch = json{{*it, patch}};
    merge_checked(j, patch, "");
}

}  // namespace asnn
