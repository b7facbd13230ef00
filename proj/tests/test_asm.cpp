#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "asnn/asm.hpp"
#include "asnn/errors.hpp"
#include "support.hpp"

using namespace asnn;
using namespace asnn::test;

TEST_SUITE("asm") {

TEST_CASE("typical parameters") {
    const AsmParams p = AsmParams::typical(500.0, 60.0);
    CHECK(p.c_free == doctest::Approx(80.0 / 3.6));
    CHECK(p.c_cong == doctest::Approx(-15.0 / 3.6));
    CHECK(p.v_thr == doctest::Approx(60.0 / 3.6));
    CHECK(p.dv == doctest::Approx(20.0 / 3.6));
    CHECK(p.sigma == 250.0);
    CHECK(p.tau == 30.0);
    CHECK_NOTHROW(p.validate());
    AsmParams bad = p;
    bad.c_cong = 1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = p;
    bad.sigma = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("kernel values") {
    CHECK(kernel_phi(0.0, 0.0, 100.0, 10.0) == 1.0);
    CHECK(kernel_phi(100.0, 0.0, 100.0, 10.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(kernel_phi(-50.0, 20.0, 100.0, 10.0) == doctest::Approx(std::exp(-2.5)));
    CHECK_THROWS_AS(kernel_phi(0.0, 0.0, 0.0, 1.0), DomainError);
}

TEST_CASE("single observation gives a constant field") {
    const Grid g(0.0, 100.0, 7, 0.0, 5.0, 9);
    ObservationSet obs;
    obs.add({250.0, 12.0, 17.5});
    const Field z = asm_estimate(obs, g, AsmParams::typical(200.0, 10.0));
    for (double v : z.values()) CHECK(v == doctest::Approx(17.5).epsilon(1e-14));
}

TEST_CASE("constant data is a fixed point") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 5; ++rep) {
        const Grid g = random_grid(rng, 20, 20);
        ObservationSet obs = random_obs(rng, g, 15);
        ObservationSet flat;
        for (const auto& o : obs.observations()) flat.add({o.x, o.t, 12.25});
        const Field z = asm_estimate(flat, g, random_params(rng, g));
        for (double v : z.values()) CHECK(v == doctest::Approx(12.25).epsilon(1e-13));
    }
}

TEST_CASE("engine matches a direct evaluation of the definition") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const Grid g = random_grid(rng, 12, 12);
        const ObservationSet obs = random_obs(rng, g, 1 + uniform_index(rng, 0, 25));
        const AsmParams p = random_params(rng, g);
        const Field z = asm_estimate(obs, g, p);
        for (std::size_t i = 0; i < g.nx; ++i)
            for (std::size_t j = 0; j < g.nt; ++j)
                CHECK(z(i, j) ==
                      doctest::Approx(naive_asm(obs, g.x_center(i), g.t_center(j), p)).epsilon(1e-12));
    }
}

TEST_CASE("a-priori field follows the characteristic") {
    // One observation upstream; the free-flow field at a downstream cell is
    // dominated by data lying on the line x = c (t - t_o).
    const Grid g(0.0, 100.0, 10, 0.0, 10.0, 30);
    const double c = 20.0;
    ObservationSet obs;
    obs.add({50.0, 5.0, 10.0});
    obs.add({50.0, 45.0, 30.0});
    const Field z = apriori_field(obs, g, c, 1e4, 2.0);
    // cell 8 (x = 850) sees the second observation at t = 45 + 800/20 = 85
    CHECK(z(8, 8) == doctest::Approx(30.0).epsilon(1e-6));
    CHECK(z(8, 4) == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("permutation invariance and boundedness") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const Grid g = random_grid(rng, 15, 15);
        const ObservationSet obs = random_obs(rng, g, 20);
        const AsmParams p = random_params(rng, g);
        std::vector<Observation> shuffled(obs.observations().begin(), obs.observations().end());
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const Field a = asm_estimate(obs, g, p);
        const Field b = asm_estimate(ObservationSet(shuffled), g, p);
        CHECK(max_abs_diff(a, b) <= 1e-12 * obs.max_value());
        CHECK(a.min() >= obs.min_value() - 1e-12);
        CHECK(a.max() <= obs.max_value() + 1e-12);
    }
}

TEST_CASE("shift covariance") {
    std::mt19937_64 rng(8);
    const Grid g(0.0, 50.0, 12, 0.0, 4.0, 14);
    const ObservationSet obs = random_obs(rng, g, 18);
    const AsmParams p = random_params(rng, g);
    const double sx = 3 * g.dx, st = 5 * g.dt;
    ObservationSet moved;
    for (const auto& o : obs.observations()) moved.add({o.x + sx, o.t + st, o.value});
    const Grid gm(g.x0 + sx, g.dx, g.nx, g.t0 + st, g.dt, g.nt);
    const Field a = asm_estimate(obs, g, p);
    const Field b = asm_estimate(moved, gm, p);
    CHECK(max_abs_diff(a, Field(g, Quantity::speed, std::vector<double>(b.values().begin(), b.values().end()))) <
          1e-9);
}

TEST_CASE("weight switch") {
    const Grid g(0.0, 1.0, 1, 0.0, 1.0, 3);
    const Field zf(g, Quantity::speed, std::vector<double>{10.0, 30.0, 100.0});
    const Field zc(g, Quantity::speed, std::vector<double>{50.0, 20.0, 100.0});
    const Field w = weight_field(zf, zc, 20.0, 5.0);
    CHECK(w(0, 0) == doctest::Approx(0.5 * (1.0 + std::tanh(2.0))));
    CHECK(w(0, 1) == 0.5);
    CHECK(w(0, 2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(weight_field(zf, zc, 20.0, 0.0), DomainError);
    const Field z = combine(w, zc, zf);
    CHECK(z(0, 1) == 25.0);
    const Field bad(g, Quantity::speed, std::vector<double>{0.5, 1.5, 0.0});
    CHECK_THROWS_AS(combine(bad, zc, zf), DomainError);
}

TEST_CASE("jacobian estimate is bitwise the forward pass") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 10; ++rep) {
        const Grid g = random_grid(rng, 20, 20);
        const ObservationSet obs = random_obs(rng, g, 30);
        const AsmParams p = random_params(rng, g);
        AsmOptions opts;
        if (rep % 2) opts.cutoff = 20.0;
        CHECK(asm_estimate_with_jacobian(obs, g, p, opts).estimate == asm_estimate(obs, g, p, opts));
    }
}

TEST_CASE("jacobian partials agree with central differences") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 5; ++rep) {
        const Grid g = random_grid(rng, 6, 6);
        const ObservationSet obs = random_obs(rng, g, 8);
        const AsmParams p = random_params(rng, g);
        const AsmJacobian jac = asm_estimate_with_jacobian(obs, g, p);
        for (std::size_t q = 0; q < kNumParams; ++q) {
            auto a = p.to_array();
            const double h = 1e-5 * std::abs(a[q]);
            a[q] += h;
            const Field up = asm_estimate(obs, g, AsmParams::from_array(a));
            a[q] -= 2 * h;
            const Field dn = asm_estimate(obs, g, AsmParams::from_array(a));
            for (std::size_t k = 0; k < g.cells(); ++k) {
                const double fd = (up.values()[k] - dn.values()[k]) / (2 * h);
                CHECK(jac.partials[q][k] == doctest::Approx(fd).epsilon(1e-5).scale(1e-6));
            }
        }
    }
}

TEST_CASE("cutoff neglects only tiny weights") {
    std::mt19937_64 rng(2);
    const Grid g(0.0, 100.0, 30, 0.0, 5.0, 40);
    // dense coverage: every cell has a weight far above the cutoff
    const ObservationSet obs = random_obs(rng, g, 400);
    const AsmParams p = AsmParams::typical(500.0, 60.0);
    AsmOptions cut;
    cut.cutoff = 30.0;
    CHECK(max_abs_diff(asm_estimate(obs, g, p), asm_estimate(obs, g, p, cut)) < 1e-9);
    cut.cutoff = 0.0;
    CHECK_THROWS_AS(asm_estimate(obs, g, p, cut), DomainError);
}

TEST_CASE("far-away observations fall back to the mean") {
    const Grid g(0.0, 1.0, 2, 0.0, 1.0, 2);
    ObservationSet obs;
    obs.add({1e6, 0.5, 8.0});
    obs.add({1e6, 1.5, 4.0});
    const Field z = apriori_field(obs, g, 20.0, 1.0, 1.0);
    for (double v : z.values()) CHECK(v == 6.0);
}

TEST_CASE("invalid inputs") {
    const Grid g(0.0, 1.0, 2, 0.0, 1.0, 2);
    CHECK_THROWS_AS(asm_estimate(ObservationSet{}, g, AsmParams::typical(1, 1)), DataError);
    ObservationSet obs;
    obs.add({0.5, 0.5, 1.0});
    CHECK_THROWS_AS(apriori_field(obs, g, 0.0, 1.0, 1.0), DomainError);
}

}
