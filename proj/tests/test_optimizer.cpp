#include <doctest.h>

#include <cmath>
#include <limits>

#include "asnn/errors.hpp"
#include "asnn/optimizer.hpp"

using namespace asnn;

namespace {

DescentProblem quadratic(std::vector<double> centre) {
    const std::size_t n = centre.size();
    DescentProblem p;
    p.start.assign(n, 0.0);
    p.scale.assign(n, 1.0);
    p.lower.assign(n, -std::numeric_limits<double>::infinity());
    p.upper.assign(n, std::numeric_limits<double>::infinity());
    p.frozen.assign(n, false);
    p.cost = [centre](const std::vector<double>& x) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - centre[i]) * (x[i] - centre[i]);
        return s;
    };
    p.gradient = [centre](const std::vector<double>& x) {
        std::vector<double> g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2 * (x[i] - centre[i]);
        return g;
    };
    return p;
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("descends a quadratic monotonically") {
    const DescentResult r = projected_descent(quadratic({1.0, -2.0, 3.0}), {});
    CHECK(r.cost_history.front() == 14.0);
    for (std::size_t k = 1; k < r.cost_history.size(); ++k) CHECK(r.cost_history[k] <= r.cost_history[k - 1]);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-3));
    CHECK(r.stop_reason == StopReason::converged);
}

TEST_CASE("projection and freezing") {
    DescentProblem p = quadratic({5.0, 5.0});
    p.upper[0] = 2.0;
    p.frozen[1] = true;
    const DescentResult r = projected_descent(p, {});
    CHECK(r.x[0] == 2.0);
    CHECK(r.x[1] == 0.0);
}

TEST_CASE("epoch budget") {
    DescentSettings s;
    s.max_epochs = 3;
    s.tolerance = 0.0;
    const DescentResult r = projected_descent(quadratic({100.0}), s);
    CHECK(r.epochs_run == 3);
    CHECK(r.cost_history.size() == 4);
    CHECK(r.stop_reason == StopReason::max_epochs);
}

TEST_CASE("zero gradient converges immediately") {
    const DescentResult r = projected_descent(quadratic({0.0}), {});
    CHECK(r.epochs_run == 1);
    CHECK(r.stop_reason == StopReason::converged);
    CHECK(r.cost_history == std::vector<double>{0.0, 0.0});
}

TEST_CASE("bad settings and divergent start") {
    DescentSettings s;
    s.step_size = 0.0;
    CHECK_THROWS_AS(projected_descent(quadratic({1.0}), s), ConfigError);
    DescentProblem p = quadratic({1.0});
    p.cost = [](const std::vector<double>&) { return std::nan(""); };
    CHECK_THROWS_AS(projected_descent(p, {}), DivergenceError);
    p = quadratic({1.0});
    p.scale.clear();
    CHECK_THROWS_AS(projected_descent(p, {}), ShapeError);
    CHECK(to_string(StopReason::converged) == "converged");
}

}
