#ifndef ASNN_TESTS_SUPPORT_HPP
#define ASNN_TESTS_SUPPORT_HPP

#include <cmath>
#include <random>
#include <vector>

#include "asnn/config.hpp"

namespace asnn::test {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Grid random_grid(std::mt19937_64& rng, std::size_t max_nx, std::size_t max_nt) {
    return Grid(uniform(rng, -500.0, 500.0), uniform(rng, 20.0, 200.0), uniform_index(rng, 2, max_nx),
                uniform(rng, 0.0, 100.0), uniform(rng, 1.0, 10.0), uniform_index(rng, 2, max_nt));
}

inline ObservationSet random_obs(std::mt19937_64& rng, const Grid& g, std::size_t n,
                                 double vmin = kmh(5.0), double vmax = kmh(110.0)) {
    ObservationSet obs;
    for (std::size_t k = 0; k < n; ++k)
        obs.add({uniform(rng, g.x0, g.x_end()), uniform(rng, g.t0, g.t_end()), uniform(rng, vmin, vmax)});
    return obs;
}

inline AsmParams random_params(std::mt19937_64& rng, const Grid& g) {
    return AsmParams{kmh(uniform(rng, 50.0, 100.0)), kmh(uniform(rng, -25.0, -8.0)),
                     kmh(uniform(rng, 30.0, 80.0)), kmh(uniform(rng, 8.0, 30.0)),
                     uniform(rng, 0.5, 3.0) * g.dx, uniform(rng, 0.5, 3.0) * g.dt};
}

/// Direct evaluation of the smoothed field at one point, written from the
/// kernel definition without any of the engine's shortcuts.
inline double naive_apriori(const ObservationSet& obs, double x, double t, double c, double sigma,
                            double tau) {
    double num = 0.0, den = 0.0;
    for (const auto& o : obs.observations()) {
        const double dx = x - o.x;
        const double dt = t - o.t;
        const double phi = std::exp(-std::abs(dx) / sigma - std::abs(dt - dx / c) / tau);
        num += phi * o.value;
        den += phi;
    }
    return num / den;
}

inline double naive_asm(const ObservationSet& obs, double x, double t, const AsmParams& p) {
    const double zf = naive_apriori(obs, x, t, p.c_free, p.sigma, p.tau);
    const double zc = naive_apriori(obs, x, t, p.c_cong, p.sigma, p.tau);
    const double w = 0.5 * (1.0 + std::tanh((p.v_thr - std::min(zf, zc)) / p.dv));
    return w * zc + (1.0 - w) * zf;
}

/// The synthetic jam-pocket fixture with four detectors.
struct LwrFixture {
    RunConfig cfg;
    Field density;
    Field truth;
    ObservationSet obs;
    Grid grid;
    AsmParams typical;
};

inline LwrFixture lwr_fixture(const RunConfig& cfg = {}) {
    const auto& s = cfg.simulation;
    Field rho = simulate(s.initial_profile(), s.steps, cfg.fd, s.dx, s.dt, s.boundary);
    Field v = to_speed(rho, cfg.fd);
    ObservationSet obs = sample_detectors(v, cfg.sampling);
    const Grid g = v.grid();
    const AsmParams p = cfg.asm_params(g);
    return {cfg, std::move(rho), std::move(v), std::move(obs), g, p};
}

inline double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    return m;
}

}  // namespace asnn::test

#endif  // ASNN_TESTS_SUPPORT_HPP
