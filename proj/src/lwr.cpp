#include "asnn/lwr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "asnn/errors.hpp"

namespace asnn {

namespace {

void check_range(double rho, const FundamentalDiagram& fd, const char* what) {
    const double slack = 1e-12 * fd.rho_jam();
    if (!(rho >= -slack && rho <= fd.rho_jam() + slack))
        throw DomainError(std::string(what) + ": density " + std::to_string(rho) +
                          " outside [0, rho_jam]");
}

// Golden-section maximization of a unimodal function on [lo, hi].
template <class F>
double golden_max(F&& f, double lo, double hi, double rel_tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > rel_tol * std::abs(c)) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

FundamentalDiagram::FundamentalDiagram(double v_f, double rho_jam, double c_cong)
    : v_f_(v_f), rho_jam_(rho_jam), c_cong_(c_cong) {
    if (!(v_f > 0.0) || !(rho_jam > 0.0) || !(c_cong < 0.0) || !std::isfinite(v_f) ||
        !std::isfinite(rho_jam) || !std::isfinite(c_cong))
        throw DomainError("fundamental diagram needs v_f > 0, rho_jam > 0, c_cong < 0");
    ratio_ = std::abs(c_cong) / v_f;
    rho_cr_ = golden_max([this](double r) { return flux(r); }, 0.0, rho_jam_, 1e-9);
    q_max_ = flux(rho_cr_);
}

FundamentalDiagram FundamentalDiagram::standard() {
    return FundamentalDiagram(kmh(100.0), per_km(120.0), kmh(-15.0));
}

double FundamentalDiagram::speed(double rho, bool clipped) const {
    if (!(rho > 0.0)) {
        if (clipped) return v_f_;
        throw DomainError("density must be positive to evaluate speed");
    }
    return v_f_ * (1.0 - std::exp(ratio_ * (1.0 - rho_jam_ / rho)));
}

double FundamentalDiagram::density(double v) const {
    if (!(v >= 0.0) || !(v < v_f_))
        throw DomainError("speed " + std::to_string(v) + " outside [0, v_f)");
    return rho_jam_ / (1.0 - std::log(1.0 - v / v_f_) / ratio_);
}

double FundamentalDiagram::density_clipped(double v) const {
    return density(std::clamp(v, 0.0, v_f_ * (1.0 - kSpeedClip)));
}

double FundamentalDiagram::density_clipped_derivative(double v) const {
    if (v < 0.0 || v > v_f_ * (1.0 - kSpeedClip)) return 0.0;
    const double l = 1.0 - std::log(1.0 - v / v_f_) / ratio_;
    return -rho_jam_ / (l * l * ratio_ * (v_f_ - v));
}

double FundamentalDiagram::flux(double rho) const {
    if (rho <= 0.0) return 0.0;
    return rho * speed(rho);
}

double FundamentalDiagram::flux_derivative(double rho) const {
    if (rho <= 0.0) return v_f_;
    const double e = std::exp(ratio_ * (1.0 - rho_jam_ / rho));
    const double v = v_f_ * (1.0 - e);
    const double dv = -v_f_ * e * ratio_ * rho_jam_ / (rho * rho);
    return v + rho * dv;
}

double speed_to_density(double v, const FundamentalDiagram& fd) { return fd.density(v); }

double density_to_speed(double rho, const FundamentalDiagram& fd) {
    if (rho > fd.rho_jam()) throw DomainError("density above rho_jam");
    return fd.speed(rho);
}

double demand(double rho, const FundamentalDiagram& fd) {
    check_range(rho, fd, "demand");
    return rho <= fd.rho_cr() ? fd.flux(rho) : fd.q_max();
}

double supply(double rho, const FundamentalDiagram& fd) {
    check_range(rho, fd, "supply");
    return rho > fd.rho_cr() ? fd.flux(rho) : fd.q_max();
}

namespace {

double demand_derivative(double rho, const FundamentalDiagram& fd) {
    return rho <= fd.rho_cr() ? fd.flux_derivative(rho) : 0.0;
}

double supply_derivative(double rho, const FundamentalDiagram& fd) {
    return rho > fd.rho_cr() ? fd.flux_derivative(rho) : 0.0;
}

double interface_flux(double left, double right, const FundamentalDiagram& fd) {
    return std::min(demand(left, fd), supply(right, fd));
}

}  // namespace

void check_cfl(const FundamentalDiagram& fd, double dx, double dt) {
    if (!(dx > 0.0) || !(dt > 0.0)) throw ConfigError("dx and dt must be positive");
    const double wave = std::max(fd.v_f(), std::abs(fd.c_cong()));
    if (dt * wave > dx * (1.0 + 1e-12))
        throw ConfigError("CFL violated: dt * max(v_f, |c_cong|) = " + std::to_string(dt * wave) +
                          " > dx = " + std::to_string(dx));
}

std::vector<double> godunov_step(std::span<const double> row, const FundamentalDiagram& fd,
                                 double dx, double dt, const Boundary& boundary) {
    check_cfl(fd, dx, dt);
    const std::size_t n = row.size();
    if (n == 0) throw ShapeError("empty density profile");

    // fluxes[k] is the flow across the interface to the left of cell k; fluxes[n] the right end.
    std::vector<double> fluxes(n + 1, 0.0);
    for (std::size_t k = 1; k < n; ++k) fluxes[k] = interface_flux(row[k - 1], row[k], fd);
    switch (boundary.kind) {
        case Boundary::Kind::closed:
            fluxes[0] = 0.0;
            fluxes[n] = 0.0;
            break;
        case Boundary::Kind::periodic:
            fluxes[0] = interface_flux(row[n - 1], row[0], fd);
            fluxes[n] = fluxes[0];
            break;
        case Boundary::Kind::open:
            fluxes[0] = interface_flux(boundary.inflow_density, row[0], fd);
            fluxes[n] = interface_flux(row[n - 1], boundary.outflow_density, fd);
            break;
    }

    const double ratio = dt / dx;
    std::vector<double> next(n);
    for (std::size_t k = 0; k < n; ++k)
        next[k] = std::clamp(row[k] + ratio * (fluxes[k] - fluxes[k + 1]), 0.0, fd.rho_jam());
    return next;
}

Field simulate(std::span<const double> initial, std::size_t steps, const FundamentalDiagram& fd,
               double dx, double dt, const Boundary& boundary, double x0, double t0) {
    check_cfl(fd, dx, dt);
    if (initial.empty()) throw ShapeError("empty initial profile");
    for (double r : initial) check_range(r, fd, "initial profile");

    const Grid grid(x0, dx, initial.size(), t0, dt, steps + 1);
    Field out(grid, Quantity::density);
    std::vector<double> state(initial.begin(), initial.end());
    for (std::size_t j = 0;; ++j) {
        for (std::size_t i = 0; i < grid.nx; ++i) out(i, j) = state[i];
        if (j == steps) break;
        state = godunov_step(state, fd, dx, dt, boundary);
    }
    return out;
}

Field to_speed(const Field& density, const FundamentalDiagram& fd) {
    Field out(density.grid(), Quantity::speed);
    auto in = density.values();
    auto v = out.values();
    for (std::size_t k = 0; k < in.size(); ++k) v[k] = fd.speed(in[k], true);
    return out;
}

Field to_density(const Field& speed, const FundamentalDiagram& fd) {
    Field out(speed.grid(), Quantity::density);
    auto in = speed.values();
    auto r = out.values();
    for (std::size_t k = 0; k < in.size(); ++k) r[k] = fd.density_clipped(in[k]);
    return out;
}

namespace {

// Accumulates the residual and, when `grad` is non-null, its gradient with
// respect to every density cell.
double residual_core(const Field& rho, const FundamentalDiagram& fd, ResidualForm form,
                     std::vector<double>* grad) {
    const Grid& g = rho.grid();
    if (grad) grad->assign(g.cells(), 0.0);
    if (g.nx < 3) return 0.0;
    const bool literal = form == ResidualForm::literal;
    const double ratio = literal ? g.dx / g.dt : g.dt / g.dx;
    const std::size_t nt_used = literal ? g.nt : g.nt - 1;
    const std::size_t nx_end = literal ? g.nx - 2 : g.nx - 1;

    auto idx = [&](std::size_t i, std::size_t j) { return i * g.nt + j; };
    double total = 0.0;
    for (std::size_t i = 1; i < nx_end; ++i) {
        for (std::size_t j = 0; j < nt_used; ++j) {
            const double left = rho(i - 1, j), mid = rho(i, j), right = rho(i + 1, j);
            const double d_in = demand(left, fd), s_in = supply(mid, fd);
            const double d_out = demand(mid, fd), s_out = supply(right, fd);
            const double q_in = std::min(d_in, s_in);
            const double q_out = std::min(d_out, s_out);
            const double next = literal ? rho(i + 1, j) : rho(i, j + 1);
            const double defect = next - mid - ratio * (q_in - q_out);
            total += std::abs(defect);
            if (!grad) continue;
            const double sgn = defect > 0.0 ? 1.0 : (defect < 0.0 ? -1.0 : 0.0);
            if (sgn == 0.0) continue;
            auto& gr = *grad;
            gr[literal ? idx(i + 1, j) : idx(i, j + 1)] += sgn;
            gr[idx(i, j)] -= sgn;
            // q_in = min(demand(left), supply(mid))
            if (d_in <= s_in)
                gr[idx(i - 1, j)] -= sgn * ratio * demand_derivative(left, fd);
            else
                gr[idx(i, j)] -= sgn * ratio * supply_derivative(mid, fd);
            // q_out = min(demand(mid), supply(right))
            if (d_out <= s_out)
                gr[idx(i, j)] += sgn * ratio * demand_derivative(mid, fd);
            else
                gr[idx(i + 1, j)] += sgn * ratio * supply_derivative(right, fd);
        }
    }
    return total;
}

}  // namespace

double physics_residual_density(const Field& density, const FundamentalDiagram& fd,
                                ResidualForm form) {
    return residual_core(density, fd, form, nullptr);
}

double physics_residual(const Field& speed, const FundamentalDiagram& fd, ResidualForm form) {
    return residual_core(to_density(speed, fd), fd, form, nullptr);
}

ResidualGradient physics_residual_gradient(const Field& speed, const FundamentalDiagram& fd,
                                           ResidualForm form) {
    ResidualGradient out;
    std::vector<double> d_rho;
    out.value = residual_core(to_density(speed, fd), fd, form, &d_rho);
    auto v = speed.values();
    out.d_speed.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        out.d_speed[k] = d_rho[k] * fd.density_clipped_derivative(v[k]);
    return out;
}

}  // namespace asnn
