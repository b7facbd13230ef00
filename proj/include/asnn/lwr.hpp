#ifndef ASNN_LWR_HPP
#define ASNN_LWR_HPP

#include <span>
#include <vector>

#include "asnn/grid.hpp"

namespace asnn {

/**
 * Newell-Franklin fundamental diagram
 *
 *     V(rho) = v_f * (1 - exp((|c_cong| / v_f) * (1 - rho_jam / rho))),
 *     Q(rho) = rho * V(rho).
 *
 * The critical density is located once at construction by golden-section
 * search on Q and cached together with the capacity q_max = Q(rho_cr).
 * Units: m/s, veh/m, veh/s.
 */
class FundamentalDiagram {
public:
    FundamentalDiagram(double v_f, double rho_jam, double c_cong);

    /// v_f = 100 km/h, rho_jam = 120 veh/km, c_cong = -15 km/h.
    static FundamentalDiagram standard();

    double v_f() const { return v_f_; }
    double rho_jam() const { return rho_jam_; }
    double c_cong() const { return c_cong_; }
    double rho_cr() const { return rho_cr_; }
    double q_max() const { return q_max_; }

    /// Speed of traffic at density rho. rho <= 0 is a domain error unless
    /// `clipped`, in which case v_f is returned.
    double speed(double rho, bool clipped = false) const;
    /// Inverse of speed(); requires 0 <= v < v_f.
    double density(double v) const;
    /// density() after clipping v into [0, v_f (1 - 1e-6)].
    double density_clipped(double v) const;
    /// d density_clipped / dv; zero where the clip is active.
    double density_clipped_derivative(double v) const;

    double flux(double rho) const;
    double flux_derivative(double rho) const;

    static constexpr double kSpeedClip = 1e-6;

private:
    double v_f_;
    double rho_jam_;
    double c_cong_;
    double ratio_;  // |c_cong| / v_f
    double rho_cr_ = 0.0;
    double q_max_ = 0.0;
};

double speed_to_density(double v, const FundamentalDiagram& fd);
double density_to_speed(double rho, const FundamentalDiagram& fd);

/// Sending flow: Q(rho) below critical density, q_max above.
double demand(double rho, const FundamentalDiagram& fd);
/// Receiving flow: q_max below critical density, Q(rho) above.
double supply(double rho, const FundamentalDiagram& fd);

struct Boundary {
    enum class Kind { closed, periodic, open };
    Kind kind = Kind::closed;
    /// Ghost-cell densities for Kind::open.
    double inflow_density = 0.0;
    double outflow_density = 0.0;

    static Boundary closed() { return {}; }
    static Boundary periodic() { return {Kind::periodic, 0.0, 0.0}; }
    static Boundary open(double inflow, double outflow) { return {Kind::open, inflow, outflow}; }
};

/// Throws ConfigError unless dt * max(v_f, |c_cong|) <= dx.
void check_cfl(const FundamentalDiagram& fd, double dx, double dt);

/// One explicit Godunov update with interface flux min(demand(left), supply(right)).
std::vector<double> godunov_step(std::span<const double> row, const FundamentalDiagram& fd,
                                 double dx, double dt, const Boundary& boundary);

/// Density field of shape nx x (steps + 1); column j is the state after j steps.
Field simulate(std::span<const double> initial, std::size_t steps, const FundamentalDiagram& fd,
               double dx, double dt, const Boundary& boundary, double x0 = 0.0,
               double t0 = 0.0);

/// Maps a density field to speeds (clipped mode, so rho = 0 gives v_f).
Field to_speed(const Field& density, const FundamentalDiagram& fd);
/// Maps a speed field to densities after clipping below v_f.
Field to_density(const Field& speed, const FundamentalDiagram& fd);

enum class ResidualForm {
    /// rho(x, t+dt) - rho(x, t) - (dt/dx)(q_in - q_out)
    conservative,
    /// rho(x+dx, t) - rho(x, t) - (dx/dt)(q_in - q_out), kept for comparison only
    literal,
};

/**
 * Sum over interior cells (boundary columns in space are excluded since
 * their fluxes depend on the boundary condition) of the absolute
 * conservation defect of the Godunov update.
 */
double physics_residual_density(const Field& density, const FundamentalDiagram& fd,
                                ResidualForm form = ResidualForm::conservative);

/// Same, starting from a speed field.
double physics_residual(const Field& speed, const FundamentalDiagram& fd,
                        ResidualForm form = ResidualForm::conservative);

/// Residual plus its gradient with respect to every speed cell.
struct ResidualGradient {
    double value = 0.0;
    std::vector<double> d_speed;
};

ResidualGradient physics_residual_gradient(const Field& speed, const FundamentalDiagram& fd,
                                           ResidualForm form = ResidualForm::conservative);

}  // namespace asnn

#endif  // ASNN_LWR_HPP
