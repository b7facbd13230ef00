#include "asnn/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "asnn/config.hpp"
#include "asnn/errors.hpp"

namespace asnn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string config;
    std::vector<std::string> sets;
    std::string out_dir = ".";
    std::optional<int> threads;
    std::optional<double> lambda;
    std::optional<std::string> cost_kind;
    std::optional<std::size_t> epochs;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonOptions& o) {
    sub->add_option("-c,--config", o.config, "JSON config file (merged over defaults)");
    sub->add_option("-s,--set", o.sets, "Override a config key, e.g. cost.lambda=0.1")
        ->allow_extra_args(false);
    sub->add_option("-o,--out", o.out_dir, "Output directory");
    sub->add_option("--threads", o.threads, "Worker thread cap")->check(CLI::NonNegativeNumber);
}

void add_training(CLI::App* sub, CommonOptions& o) {
    sub->add_option("--lambda", o.lambda, "Regularization weight")->check(CLI::NonNegativeNumber);
    sub->add_option("--cost", o.cost_kind, "Regularizer: convolution or physics")
        ->check(CLI::IsMember({"convolution", "physics"}));
    sub->add_option("--epochs", o.epochs, "Maximum training epochs")->check(CLI::PositiveNumber);
}

/// Book-keeping for one command: outputs, digests, metrics, manifest.
class Run {
public:
    Run(std::string command, const CommonOptions& o, std::ostream& out, std::ostream& err)
        : command_(std::move(command)), out_(out), err_(err), start_(std::chrono::steady_clock::now()) {
        config_ = o.config.empty() ? default_config_json() : load_config_json(o.config);
        for (const auto& s : o.sets) apply_override(config_, s);
        if (o.lambda) config_["cost"]["lambda"] = *o.lambda;
        if (o.cost_kind) config_["cost"]["kind"] = *o.cost_kind;
        if (o.epochs) config_[command_ == "train-ensemble" ? "ensemble" : "train"]["max_epochs"] = *o.epochs;
        if (o.seed) config_["sampling"]["seed"] = *o.seed;
        if (o.threads) config_["threads"] = *o.threads;
        cfg_ = RunConfig::from_json(config_);
#ifdef _OPENMP
        if (cfg_.threads > 0) omp_set_num_threads(cfg_.threads);
#endif
        dir_ = o.out_dir;
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    const RunConfig& cfg() const { return cfg_; }
    std::ostream& out() { return out_; }

    void input(const std::string& role, const fs::path& path) {
        inputs_[role] = {{"file", path.filename().string()}, {"sha256", file_digest(path)}};
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

    void output(const std::string& name) { outputs_.push_back(name); }

    void field(const std::string& stem, const Field& f, bool heatmap = false) {
        export_field(f, path(stem + ".csv"), FieldFormat::csv_grid, 0.0);
        output(stem + ".csv");
        if (heatmap) {
            export_field(f, path(stem + ".pgm"), FieldFormat::pgm_heatmap, cfg_.fd.v_f());
            output(stem + ".pgm");
        }
    }

    void warn(const std::string& w) {
        err_ << "warning: " << w << '\n';
        warnings_.push_back(w);
    }

    void metric(const std::string& model, std::optional<double> m_r, std::optional<double> cost,
                std::optional<std::size_t> epochs) {
        json m = {{"model", model}};
        m["m_r"] = m_r ? json(*m_r) : json(nullptr);
        m["final_cost"] = cost ? json(*cost) : json(nullptr);
        m["epochs"] = epochs ? json(*epochs) : json(nullptr);
        metrics_.push_back(m);
    }

    void finish() {
        {
            std::ofstream f(path("metrics.csv"), std::ios::binary);
            f << "command,model,m_r,final_cost,epochs\n";
            for (const auto& m : metrics_) {
                f << command_ << ',' << m["model"].get<std::string>() << ',';
                if (!m["m_r"].is_null()) f << format_double(m["m_r"].get<double>());
                f << ',';
                if (!m["final_cost"].is_null()) f << format_double(m["final_cost"].get<double>());
                f << ',';
                if (!m["epochs"].is_null()) f << m["epochs"].get<std::size_t>();
                f << '\n';
            }
            if (!f) throw IoError("cannot write '" + path("metrics.csv").string() + "'");
        }
        output("metrics.csv");

        json outs = json::object();
        for (const auto& name : outputs_) outs[name] = file_digest(path(name));
        json manifest = {{"command", command_},
                         {"config", config_},
                         {"inputs", inputs_},
                         {"outputs", outs},
                         {"metrics", metrics_},
                         {"warnings", warnings_},
                         {"timing", "timing.json"}};
        write_json("manifest.json", manifest);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_json("timing.json", {{"command", command_}, {"wall_time_s", wall}});
    }

    void write_json(const std::string& name, const json& j) {
        std::ofstream f(path(name), std::ios::binary);
        f << j.dump(2) << '\n';
        if (!f) throw IoError("cannot write '" + path(name).string() + "'");
    }

    void write_text(const std::string& name, const std::string& text) {
        std::ofstream f(path(name), std::ios::binary);
        f << text;
        if (!f) throw IoError("cannot write '" + path(name).string() + "'");
        output(name);
    }

private:
    std::string command_;
    std::ostream& out_;
    std::ostream& err_;
    std::chrono::steady_clock::time_point start_;
    json config_;
    RunConfig cfg_;
    fs::path dir_;
    json inputs_ = json::object();
    std::vector<std::string> outputs_;
    json metrics_ = json::array();
    std::vector<std::string> warnings_;
};

std::string cost_history_csv(const std::vector<double>& history) {
    std::string s = "epoch,cost\n";
    for (std::size_t e = 0; e < history.size(); ++e)
        s += std::to_string(e) + ',' + format_double(history[e]) + '\n';
    return s;
}

json params_json(const RunConfig& base, const AsmParams& p) {
    RunConfig c = base;
    c.c_free = p.c_free;
    c.c_cong = p.c_cong;
    c.v_thr = p.v_thr;
    c.dv = p.dv;
    c.sigma = p.sigma;
    c.tau = p.tau;
    return {{"asm", c.to_json()["asm"]}};
}

std::string kind_name(CostKind k) { return k == CostKind::convolution ? "convolution" : "physics"; }

Field simulate_truth(const RunConfig& cfg, Field* density = nullptr) {
    const auto& s = cfg.simulation;
    Field rho = simulate(s.initial_profile(), s.steps, cfg.fd, s.dx, s.dt, s.boundary);
    if (density) *density = rho;
    return to_speed(rho, cfg.fd);
}

ObservationSet sample(const RunConfig& cfg, const Field& truth,
                      const std::vector<TrajectoryRecord>& records) {
    switch (cfg.sampling.mode) {
        case SamplingMode::detectors: return sample_detectors(truth, cfg.sampling);
        case SamplingMode::floating_cars: return sample_fcd(clip_records(records, truth.grid()), cfg.sampling);
        case SamplingMode::hybrid:
            return sample_hybrid(truth, clip_records(records, truth.grid()), cfg.sampling);
    }
    return {};
}

struct Inputs {
    std::string observations;
    std::string truth;
};

std::optional<Field> load_truth(Run& run, const std::string& path) {
    if (path.empty()) return std::nullopt;
    run.input("truth", path);
    return import_field(path);
}

Grid estimation_grid(const Run& run, const std::optional<Field>& truth) {
    return truth ? truth->grid() : run.cfg().resolved_grid();
}

std::optional<double> error_vs(const std::optional<Field>& truth, const Field& est) {
    if (!truth) return std::nullopt;
    return relative_error(est, *truth);
}

void print_mr(std::ostream& out, const std::string& model, std::optional<double> m_r) {
    if (m_r) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s m_r=%.6f\n", model.c_str(), *m_r);
        out << buf;
    }
}

// --- commands ----------------------------------------------------------------

void cmd_simulate(Run& run) {
    Field rho(Grid(0, 1, 1, 0, 1, 1), Quantity::density);
    const Field v = simulate_truth(run.cfg(), &rho);
    run.field("truth", v, true);
    run.field("density", rho);
    run.metric("simulation", std::nullopt, std::nullopt, std::nullopt);
}

struct SampleOptions {
    std::string truth;
    std::string trajectories;
    std::string columns = "standard";
    std::size_t vehicles = 200;
    double record_period = 0.0;
};

void cmd_sample(Run& run, const SampleOptions& o) {
    run.input("truth", o.truth);
    const Field truth = import_field(o.truth);
    std::vector<TrajectoryRecord> records;
    if (run.cfg().sampling.mode != SamplingMode::detectors) {
        if (!o.trajectories.empty()) {
            run.input("trajectories", o.trajectories);
            const ColumnMap cols = o.columns == "ngsim"   ? ColumnMap::ngsim()
                                   : o.columns == "highd" ? ColumnMap::highd()
                                                          : ColumnMap::standard();
            records = read_trajectories(o.trajectories, cols);
        } else {
            const double period = o.record_period > 0.0 ? o.record_period : truth.grid().dt;
            records = synthesize_trajectories(truth, o.vehicles, period);
            write_trajectories(run.path("trajectories.csv"), records);
            run.output("trajectories.csv");
        }
    }
    const ObservationSet obs = sample(run.cfg(), truth, records);
    write_observations(run.path("observations.csv"), obs);
    run.output("observations.csv");
    run.out() << "observations=" << obs.size() << '\n';
    run.metric("sampling", std::nullopt, std::nullopt, std::nullopt);
}

void cmd_estimate(Run& run, const Inputs& in, bool lambda_given) {
    if (lambda_given) run.warn("--lambda has no effect on estimate (no training)");
    run.input("observations", in.observations);
    const ObservationSet obs = read_observations(in.observations);
    const auto truth = load_truth(run, in.truth);
    const Grid grid = estimation_grid(run, truth);
    const Field est = asm_estimate(obs, grid, run.cfg().asm_params(grid), run.cfg().train.asm_options);
    run.field("estimate", est, true);
    const auto m_r = error_vs(truth, est);
    print_mr(run.out(), "ASM", m_r);
    run.metric("asm", m_r, std::nullopt, std::nullopt);
}

void cmd_train(Run& run, const Inputs& in, bool lambda_search) {
    run.input("observations", in.observations);
    const ObservationSet obs = read_observations(in.observations);
    const auto truth = load_truth(run, in.truth);
    const Grid grid = estimation_grid(run, truth);
    const AsmParams init = run.cfg().asm_params(grid);
    const auto& tcfg = run.cfg().train;

    CostConfig cost = run.cfg().cost;
    std::vector<double> lambdas = {cost.lambda};
    if (lambda_search) {
        if (!truth) throw ConfigError("--lambda-search needs --truth to rank candidates");
        lambdas.assign(kLambdaCandidates.begin(), kLambdaCandidates.end());
    }

    std::optional<TrainReport> best;
    std::optional<double> best_mr;
    Field best_est(grid, Quantity::speed);
    double selected = cost.lambda;
    std::string search = "lambda,final_cost,m_r\n";
    for (double lambda : lambdas) {
        cost.lambda = lambda;
        const AsnnObjective objective(obs, grid, cost, tcfg.asm_options);
        TrainReport rep = train(objective, tcfg, init);
        Field est = objective.forward(rep.final_params);
        const auto m_r = error_vs(truth, est);
        search += format_double(lambda) + ',' + format_double(rep.cost_history.back()) + ',' +
                  (m_r ? format_double(*m_r) : std::string()) + '\n';
        if (!best || (m_r && *m_r < *best_mr)) {
            best = std::move(rep);
            best_mr = m_r;
            best_est = std::move(est);
            selected = lambda;
        }
    }
    for (const auto& w : best->warnings) run.warn(w);
    if (lambda_search) {
        run.write_text("lambda_search.csv", search);
        run.out() << "selected lambda=" << format_double(selected) << '\n';
    }
    run.field("estimate", best_est, true);
    run.write_text("cost_history.csv", cost_history_csv(best->cost_history));
    run.write_json("params.json", params_json(run.cfg(), best->final_params));
    run.output("params.json");
    print_mr(run.out(), "ASNN", best_mr);
    run.out() << "epochs=" << best->epochs_run << " stop=" << to_string(best->stop_reason) << '\n';
    run.metric("asnn_" + kind_name(cost.kind), best_mr, best->cost_history.back(), best->epochs_run);
}

struct EnsembleResult {
    MasnnReport report;
    Field estimate;
    std::vector<AsmParams> inits;
    std::vector<std::optional<double>> standalone_mr;
};

EnsembleResult run_ensemble(const RunConfig& cfg, const ObservationSet& obs, const Grid& grid,
                            const std::optional<Field>& truth) {
    const TrainConfig tcfg = cfg.ensemble_train();
    const auto inits = cfg.ensemble_inits(grid).branches();
    const AsnnObjective objective(obs, grid, cfg.cost, tcfg.asm_options);
    EnsembleResult r{train_masnn(objective, tcfg, inits), Field(grid, Quantity::speed), inits, {}};
    r.estimate = masnn_forward(r.report.ensemble, obs, grid, tcfg.asm_options);
    for (const auto& p : inits)
        r.standalone_mr.push_back(error_vs(truth, asm_estimate(obs, grid, p, tcfg.asm_options)));
    return r;
}

std::string weights_csv(const EnsembleResult& r) {
    std::string s =
        "branch,sigma_m,tau_s,weight,asm_m_r,trained_sigma_m,trained_tau_s,trained_v_thr_kmh,"
        "trained_dv_kmh\n";
    const auto w = r.report.ensemble.weights();
    for (std::size_t b = 0; b < r.inits.size(); ++b) {
        const auto& t = r.report.ensemble.branches[b];
        s += std::to_string(b + 1) + ',' + format_double(r.inits[b].sigma) + ',' +
             format_double(r.inits[b].tau) + ',' + format_double(w[b]) + ',' +
             (r.standalone_mr[b] ? format_double(*r.standalone_mr[b]) : std::string()) + ',' +
             format_double(t.sigma) + ',' + format_double(t.tau) + ',' +
             format_double(convert_speed(t.v_thr, SpeedUnit::ms, SpeedUnit::kmh)) + ',' +
             format_double(convert_speed(t.dv, SpeedUnit::ms, SpeedUnit::kmh)) + '\n';
    }
    return s;
}

json ensemble_json(const EnsembleResult& r) {
    json branches = json::array();
    const auto w = r.report.ensemble.weights();
    for (std::size_t b = 0; b < w.size(); ++b) {
        const auto a = r.report.ensemble.branches[b].to_array();
        branches.push_back({{"params_si", std::vector<double>(a.begin(), a.end())},
                            {"logit", r.report.ensemble.logits[b]},
                            {"weight", w[b]}});
    }
    return {{"branches", branches}, {"vertex_restart", r.report.vertex_restart}};
}

void cmd_train_ensemble(Run& run, const Inputs& in) {
    run.input("observations", in.observations);
    const ObservationSet obs = read_observations(in.observations);
    const auto truth = load_truth(run, in.truth);
    const Grid grid = estimation_grid(run, truth);
    const EnsembleResult r = run_ensemble(run.cfg(), obs, grid, truth);
    run.field("estimate", r.estimate, true);
    run.write_text("cost_history.csv", cost_history_csv(r.report.joint.cost_history));
    run.write_text("weights.csv", weights_csv(r));
    run.write_json("ensemble.json", ensemble_json(r));
    run.output("ensemble.json");
    const auto m_r = error_vs(truth, r.estimate);
    print_mr(run.out(), "MASNN", m_r);
    run.metric("masnn", m_r, r.report.joint.cost_history.back(), r.report.joint.epochs_run);
}

void cmd_evaluate(Run& run, const std::string& estimate, const std::string& truth_path) {
    run.input("estimate", estimate);
    run.input("truth", truth_path);
    const Field est = import_field(estimate);
    const Field truth = import_field(truth_path);
    require_same_grid(est.grid(), truth.grid(), "estimate and truth");
    Field err(truth.grid(), Quantity::speed);
    auto e = err.values();
    auto a = est.values();
    auto b = truth.values();
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = std::abs(a[k] - b[k]);
    run.field("abs_error", err, true);
    const double m_r = relative_error(est, truth);
    print_mr(run.out(), "estimate", m_r);
    run.metric("evaluate", m_r, std::nullopt, std::nullopt);
}

void cmd_export(Run& run, const std::string& field, const std::string& format,
                const std::string& output, std::optional<double> scale_max) {
    run.input("field", field);
    const Field f = import_field(field);
    const FieldFormat fmt = format == "pgm" ? FieldFormat::pgm_heatmap : FieldFormat::csv_grid;
    const std::string name = output.empty() ? (format == "pgm" ? "field.pgm" : "field.csv") : output;
    if (fs::path(name).has_parent_path()) throw ConfigError("--output must be a file name inside --out");
    export_field(f, run.path(name), fmt, scale_max ? *scale_max : run.cfg().fd.v_f());
    run.output(name);
    run.metric("export", std::nullopt, std::nullopt, std::nullopt);
}

void cmd_quickstart(Run& run) {
    const RunConfig& cfg = run.cfg();
    const Field truth = simulate_truth(cfg);
    run.field("truth", truth, true);
    SamplingSpec spec = cfg.sampling;
    spec.mode = SamplingMode::detectors;
    const ObservationSet obs = sample_detectors(truth, spec);
    write_observations(run.path("observations.csv"), obs);
    run.output("observations.csv");
    const Grid grid = truth.grid();
    const auto& opts = cfg.train.asm_options;

    struct Row {
        std::string model;
        double m_r;
    };
    std::vector<Row> rows;

    const AsmParams init = cfg.asm_params(grid);
    const Field asm_est = asm_estimate(obs, grid, init, opts);
    run.field("asm", asm_est, true);
    rows.push_back({"ASM", relative_error(asm_est, truth)});
    run.metric("asm", rows.back().m_r, std::nullopt, std::nullopt);

    for (CostKind kind : {CostKind::convolution, CostKind::physics}) {
        CostConfig cost = cfg.cost;
        cost.kind = kind;
        const AsnnObjective objective(obs, grid, cost, opts);
        const TrainReport rep = train(objective, cfg.train, init);
        const Field est = objective.forward(rep.final_params);
        const std::string stem = "asnn_" + kind_name(kind);
        run.field(stem, est, true);
        run.write_text(stem + "_cost_history.csv", cost_history_csv(rep.cost_history));
        rows.push_back({"ASNN (" + kind_name(kind) + ")", relative_error(est, truth)});
        run.metric(stem, rows.back().m_r, rep.cost_history.back(), rep.epochs_run);
    }

    const EnsembleResult ens = run_ensemble(cfg, obs, grid, truth);
    run.field("masnn", ens.estimate, true);
    run.write_text("masnn_cost_history.csv", cost_history_csv(ens.report.joint.cost_history));
    run.write_text("weights.csv", weights_csv(ens));
    rows.push_back({"MASNN", relative_error(ens.estimate, truth)});
    run.metric("masnn", rows.back().m_r, ens.report.joint.cost_history.back(),
               ens.report.joint.epochs_run);

    char buf[128];
    run.out() << "model                 m_r       vs ASM\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-20s  %.5f  %+.5f\n", r.model.c_str(), r.m_r,
                      r.m_r - rows.front().m_r);
        run.out() << buf;
    }
}

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

int fail(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    err << json{{"error", {{"kind", kind}, {"message", one_line(message)}}}}.dump() << '\n';
    return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Traffic speed field reconstruction from sparse observations", "asnn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "asnn 0.1.0");

    CommonOptions common;
    Inputs inputs;
    SampleOptions sample_opts;
    bool lambda_search = false;
    std::string est_path, truth_path, field_path, format = "csv", output;
    std::optional<double> scale_max;

    auto* sim = app.add_subcommand("simulate", "Run the LWR simulator and write the truth field");
    add_common(sim, common);

    auto* smp = app.add_subcommand("sample", "Sample detectors and/or probe vehicles from a truth field");
    add_common(smp, common);
    smp->add_option("--truth", sample_opts.truth, "Truth speed field (csv)")->required()->check(CLI::ExistingFile);
    smp->add_option("--trajectories", sample_opts.trajectories, "Trajectory file for probe sampling")
        ->check(CLI::ExistingFile);
    smp->add_option("--columns", sample_opts.columns, "Trajectory column map")
        ->check(CLI::IsMember({"standard", "ngsim", "highd"}));
    smp->add_option("--vehicles", sample_opts.vehicles, "Synthetic probes when no trajectories are given")
        ->check(CLI::PositiveNumber);
    smp->add_option("--record-period", sample_opts.record_period, "Synthetic probe record period (s)")
        ->check(CLI::PositiveNumber);
    smp->add_option("--seed", common.seed, "Probe selection seed");

    auto add_inputs = [&](CLI::App* sub) {
        sub->add_option("--obs", inputs.observations, "Observation file")->required()->check(CLI::ExistingFile);
        sub->add_option("--truth", inputs.truth, "Truth field for m_r")->check(CLI::ExistingFile);
    };
    auto* est = app.add_subcommand("estimate", "Conventional adaptive smoothing");
    add_common(est, common);
    add_inputs(est);
    est->add_option("--lambda", common.lambda, "Ignored (no training)");

    auto* trn = app.add_subcommand("train", "Train the six smoothing parameters");
    add_common(trn, common);
    add_training(trn, common);
    add_inputs(trn);
    trn->add_flag("--lambda-search", lambda_search, "Grid-search lambda over the candidate set");

    auto* ens = app.add_subcommand("train-ensemble", "Train the multi-initialization ensemble");
    add_common(ens, common);
    add_training(ens, common);
    add_inputs(ens);

    auto* evl = app.add_subcommand("evaluate", "Relative error and absolute-error heatmap");
    add_common(evl, common);
    evl->add_option("--estimate", est_path, "Estimated field")->required()->check(CLI::ExistingFile);
    evl->add_option("--truth", truth_path, "Truth field")->required()->check(CLI::ExistingFile);

    auto* exp = app.add_subcommand("export", "Convert a field to csv or pgm");
    add_common(exp, common);
    exp->add_option("--field", field_path, "Field file")->required()->check(CLI::ExistingFile);
    exp->add_option("--format", format, "csv or pgm")->check(CLI::IsMember({"csv", "pgm"}));
    exp->add_option("--output", output, "Output file name");
    exp->add_option("--scale-max", scale_max, "Heatmap white level (m/s); default v_f")
        ->check(CLI::PositiveNumber);

    auto* qs = app.add_subcommand("quickstart", "Simulate, sample 4 detectors, compare ASM/ASNN/MASNN");
    add_common(qs, common);
    add_training(qs, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "asnn 0.1.0\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(err, "usage", e.what(), 2);
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        Run run(sub->get_name(), common, out, err);
        if (sub == sim) cmd_simulate(run);
        else if (sub == smp) cmd_sample(run, sample_opts);
        else if (sub == est) cmd_estimate(run, inputs, common.lambda.has_value());
        else if (sub == trn) cmd_train(run, inputs, lambda_search);
        else if (sub == ens) cmd_train_ensemble(run, inputs);
        else if (sub == evl) cmd_evaluate(run, est_path, truth_path);
        else if (sub == exp) cmd_export(run, field_path, format, output, scale_max);
        else cmd_quickstart(run);
        run.finish();
    } catch (const Error& e) {
        return fail(err, e.kind(), e.what(), 1);
    } catch (const std::exception& e) {
        return fail(err, "internal", e.what(), 1);
    }
    return 0;
}

}  // namespace asnn::cli
