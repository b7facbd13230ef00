#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "asnn/errors.hpp"
#include "asnn/masnn.hpp"
#include "support.hpp"

using namespace asnn;
using namespace asnn::test;

TEST_SUITE("masnn") {

TEST_CASE("softmax lies on the simplex") {
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> l(uniform_index(rng, 1, 8));
        for (double& x : l) x = uniform(rng, -50.0, 50.0);
        const auto w = softmax(l);
        double s = 0.0;
        for (double x : w) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
            s += x;
        }
        CHECK(std::abs(s - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(softmax({}), DataError);
    const auto w = softmax({1000.0, 0.0});
    CHECK(w[0] == 1.0);
}

TEST_CASE("init grid") {
    InitGrid ig{{2.5, 5.0, 7.5}, AsmParams::typical(100.0, 10.0)};
    const auto b = ig.branches();
    REQUIRE(b.size() == 3);
    CHECK(b[1].tau == 5.0);
    CHECK(b[1].sigma == 50.0);
    ig.tau_values = {2.5, 2.5};
    CHECK_THROWS_AS(ig.validate(), ConfigError);
    ig.tau_values = {0.0};
    CHECK_THROWS_AS(ig.validate(), ConfigError);
}

TEST_CASE("forward pass examples") {
    std::mt19937_64 rng(5);
    const Grid g = random_grid(rng, 15, 15);
    const ObservationSet obs = random_obs(rng, g, 20);
    const AsmParams p1 = random_params(rng, g), p2 = random_params(rng, g), p3 = random_params(rng, g);
    const Field z1 = asm_estimate(obs, g, p1);

    CHECK(max_abs_diff(masnn_forward(Ensemble::uniform({p1}), obs, g), z1) == 0.0);
    Ensemble twin{{p1, p1}, {0.3, -1.7}};
    CHECK(max_abs_diff(masnn_forward(twin, obs, g), z1) <= 1e-12 * z1.max());
    Ensemble vertex{{p1, p2, p3}, {30.0, -30.0, -30.0}};
    CHECK(max_abs_diff(masnn_forward(vertex, obs, g), z1) <= 1e-9 * z1.max());

    Ensemble mixed{{p1, p2, p3}, {0.2, 1.0, -0.5}};
    const Field z = masnn_forward(mixed, obs, g);
    const Field z2 = asm_estimate(obs, g, p2), z3 = asm_estimate(obs, g, p3);
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double lo = std::min({z1.values()[k], z2.values()[k], z3.values()[k]});
        const double hi = std::max({z1.values()[k], z2.values()[k], z3.values()[k]});
        CHECK(z.values()[k] >= lo - 1e-12);
        CHECK(z.values()[k] <= hi + 1e-12);
    }

    // permutation equivariance
    Ensemble perm{{p3, p1, p2}, {-0.5, 0.2, 1.0}};
    CHECK(max_abs_diff(masnn_forward(perm, obs, g), z) <= 1e-12 * z.max());
    const auto wa = mixed.weights(), wb = perm.weights();
    CHECK(wa[0] == doctest::Approx(wb[1]).epsilon(1e-14));
    CHECK(wa[2] == doctest::Approx(wb[0]).epsilon(1e-14));
}

TEST_CASE("invalid ensembles") {
    Ensemble e;
    CHECK_THROWS_AS(e.validate(), DataError);
    e = Ensemble::uniform({AsmParams::typical(10, 10)});
    e.logits.push_back(0.0);
    CHECK_THROWS_AS(e.validate(), ShapeError);
}

TEST_CASE("joint gradient agrees with finite differences") {
    std::mt19937_64 rng(23);
    const Grid g = random_grid(rng, 8, 8);
    const ObservationSet obs = random_obs(rng, g, 10, kmh(10.0), kmh(100.0));
    const AsnnObjective base(obs, g, CostConfig{});
    const MasnnObjective joint(base);
    Ensemble e{{random_params(rng, g), random_params(rng, g)}, {0.4, -0.3}};
    const auto rev = joint.gradient(e, GradMode::reverse_mode, 1e-4);
    const auto fd = joint.gradient(e, GradMode::finite_difference, 1e-6);
    REQUIRE(rev.size() == 2 * kNumParams + 2);
    double norm = 0.0;
    for (double v : fd) norm = std::max(norm, std::abs(v));
    for (std::size_t k = 0; k < rev.size(); ++k) CHECK(std::abs(rev[k] - fd[k]) <= 1e-4 * norm);
}

TEST_CASE("one branch reduces to plain training") {
    RunConfig cfg;
    cfg.simulation.steps = 40;
    cfg.simulation.nx = 30;
    cfg.simulation.pocket_start = 1500.0;
    const LwrFixture fx = lwr_fixture(cfg);
    TrainConfig t;
    t.max_epochs = 5;
    t.grad_mode = GradMode::reverse_mode;
    const AsnnObjective objective(fx.obs, fx.grid, CostConfig{});
    const MasnnReport r = train_masnn(objective, t, {fx.typical});
    const TrainReport single = train(objective, t, fx.typical);
    CHECK(r.ensemble.weights()[0] == 1.0);
    CHECK(r.joint.cost_history.back() == doctest::Approx(single.cost_history.back()).epsilon(1e-9));
}

TEST_CASE("ensemble cost never exceeds the best single branch") {
    RunConfig cfg;
    cfg.simulation.steps = 60;
    cfg.simulation.nx = 40;
    cfg.simulation.pocket_start = 2000.0;
    const LwrFixture fx = lwr_fixture(cfg);
    TrainConfig t;
    t.max_epochs = 6;
    t.grad_mode = GradMode::reverse_mode;
    t.freeze_wave_speeds = true;
    const auto inits = cfg.ensemble_inits(fx.grid).branches();
    const AsnnObjective objective(fx.obs, fx.grid, CostConfig{});
    const MasnnReport r = train_masnn(objective, t, inits);
    REQUIRE(r.single_branch.size() == inits.size());
    for (const auto& s : r.single_branch) CHECK(r.joint.cost_history.back() <= s.cost_history.back() + 1e-6);
    const auto w = r.ensemble.weights();
    CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) <= 1e-12);
    for (const auto& b : r.ensemble.branches) {
        CHECK(b.c_free == inits[0].c_free);
        CHECK(b.c_cong == inits[0].c_cong);
    }
}

}
