#include "asnn/asm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "asnn/errors.hpp"

namespace asnn {

namespace {

// Kernel weights below 1e-300 are flushed to zero.
constexpr double kFlushExponent = 690.7755278982137;  // -ln(1e-300)

struct KernelSums {
    double num = 0.0;
    double den = 0.0;
    // d/dtheta of the log-kernel, weighted: index 0 = c, 1 = sigma, 2 = tau.
    std::array<double, 3> dden{};
    std::array<double, 3> dnum{};
};

// Single accumulation routine shared by the forward and tangent passes so
// that the value part performs identical floating-point operations.
template <bool Tangent>
inline void accumulate(const Observation& o, double x, double t, double inv_c, double inv_sigma,
                       double inv_tau, double limit, KernelSums& acc) {
    const double ddx = x - o.x;
    const double shift = (t - o.t) - ddx * inv_c;
    const double ex = std::abs(ddx) * inv_sigma;
    const double et = std::abs(shift) * inv_tau;
    const double arg = ex + et;
    if (arg > limit) return;
    const double phi = std::exp(-arg);
    acc.num += phi * o.value;
    acc.den += phi;
    if constexpr (Tangent) {
        const double sgn = shift > 0.0 ? 1.0 : (shift < 0.0 ? -1.0 : 0.0);
        const double g_c = -sgn * ddx * inv_c * inv_c * inv_tau;
        const double g_sigma = ex * inv_sigma;
        const double g_tau = et * inv_tau;
        const double pz = phi * o.value;
        acc.dden[0] += phi * g_c;
        acc.dnum[0] += pz * g_c;
        acc.dden[1] += phi * g_sigma;
        acc.dnum[1] += pz * g_sigma;
        acc.dden[2] += phi * g_tau;
        acc.dnum[2] += pz * g_tau;
    }
}

// Kernel sums for every time cell of row i. Observations are visited in
// order and each only touches the time cells inside its cutoff window, so
// every cell sees the same additions as a full scan.
template <bool Tangent>
void accumulate_row(std::span<const Observation> obs, const Grid& grid, std::size_t i,
                    double inv_c, double inv_sigma, double inv_tau, double limit,
                    std::vector<KernelSums>& row) {
    row.assign(grid.nt, KernelSums{});
    const double x = grid.x_center(i);
    const double last = static_cast<double>(grid.nt - 1);
    for (const auto& o : obs) {
        const double ddx = x - o.x;
        const double ex = std::abs(ddx) * inv_sigma;
        if (ex > limit) continue;
        const double reach = (limit - ex) / inv_tau;
        const double centre = (o.t + ddx * inv_c - grid.t0) / grid.dt - 0.5;
        const double lo = std::clamp(std::floor(centre - reach / grid.dt) - 1.0, 0.0, last);
        const double hi = std::clamp(std::ceil(centre + reach / grid.dt) + 1.0, 0.0, last);
        if (!(lo <= hi)) continue;
        for (auto j = static_cast<std::size_t>(lo); j <= static_cast<std::size_t>(hi); ++j)
            accumulate<Tangent>(o, x, grid.t_center(j), inv_c, inv_sigma, inv_tau, limit, row[j]);
    }
}

inline double congestion_weight(double z_free, double z_cong, double v_thr, double dv) {
    return 0.5 * (1.0 + std::tanh((v_thr - std::min(z_free, z_cong)) / dv));
}

inline double mix(double w, double z_cong, double z_free) {
    return w * z_cong + (1.0 - w) * z_free;
}

double exponent_limit(const AsmOptions& opts) {
    if (opts.cutoff) {
        if (!(*opts.cutoff > 0.0)) throw DomainError("cutoff must be positive");
        return std::min(*opts.cutoff, kFlushExponent);
    }
    return kFlushExponent;
}

void check_smoothing(double sigma, double tau) {
    if (!(sigma > 0.0) || !(tau > 0.0))
        throw DomainError("smoothing widths sigma and tau must be positive");
}

void check_inputs(const ObservationSet& obs, double c) {
    if (obs.empty()) throw DataError("empty observation set");
    if (c == 0.0 || !std::isfinite(c)) throw DomainError("wave speed must be finite and non-zero");
}

}  // namespace

AsmParams AsmParams::typical(double detector_spacing, double sampling_period) {
    AsmParams p;
    p.c_free = kmh(80.0);
    p.c_cong = kmh(-15.0);
    p.v_thr = kmh(60.0);
    p.dv = kmh(20.0);
    p.sigma = detector_spacing / 2.0;
    p.tau = sampling_period / 2.0;
    return p;
}

std::array<double, kNumParams> AsmParams::to_array() const {
    return {c_free, c_cong, v_thr, dv, sigma, tau};
}

AsmParams AsmParams::from_array(const std::array<double, kNumParams>& a) {
    return AsmParams{a[kCFree], a[kCCong], a[kVThr], a[kDv], a[kSigma], a[kTau]};
}

void AsmParams::validate() const {
    for (double v : to_array())
        if (!std::isfinite(v)) throw DomainError("ASM parameters must be finite");
    if (!(c_free > 0.0)) throw DomainError("c_free must be positive");
    if (!(c_cong < 0.0)) throw DomainError("c_cong must be negative");
    if (!(v_thr > 0.0)) throw DomainError("v_thr must be positive");
    if (!(dv > 0.0)) throw DomainError("dv must be positive");
    check_smoothing(sigma, tau);
}

double kernel_phi(double dx, double dt, double sigma, double tau) {
    check_smoothing(sigma, tau);
    return std::exp(-(std::abs(dx) / sigma + std::abs(dt) / tau));
}

Field apriori_field(const ObservationSet& obs, const Grid& grid, double c, double sigma,
                    double tau, const AsmOptions& opts) {
    check_inputs(obs, c);
    check_smoothing(sigma, tau);
    const double limit = exponent_limit(opts);
    const double fallback = obs.mean_value();
    const auto data = obs.observations();
    Field out(grid, Quantity::speed);
    const auto nx = static_cast<std::ptrdiff_t>(grid.nx);
#pragma omp parallel
    {
        std::vector<KernelSums> row;
#pragma omp for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < nx; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            accumulate_row<false>(data, grid, i, 1.0 / c, 1.0 / sigma, 1.0 / tau, limit, row);
            for (std::size_t j = 0; j < grid.nt; ++j)
                out(i, j) = row[j].den > 0.0 ? row[j].num / row[j].den : fallback;
        }
    }
    return out;
}

Field weight_field(const Field& z_free, const Field& z_cong, double v_thr, double dv) {
    require_same_grid(z_free.grid(), z_cong.grid(), "weight_field");
    if (!(dv > 0.0)) throw DomainError("transition width dv must be positive");
    Field w(z_free.grid(), Quantity::speed);
    auto zf = z_free.values();
    auto zc = z_cong.values();
    auto out = w.values();
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = congestion_weight(zf[k], zc[k], v_thr, dv);
    return w;
}

Field combine(const Field& w, const Field& z_cong, const Field& z_free) {
    require_same_grid(w.grid(), z_cong.grid(), "combine");
    require_same_grid(w.grid(), z_free.grid(), "combine");
    Field z(w.grid(), z_free.quantity());
    auto wv = w.values();
    auto zc = z_cong.values();
    auto zf = z_free.values();
    auto out = z.values();
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!(wv[k] >= 0.0 && wv[k] <= 1.0)) throw DomainError("combination weight outside [0, 1]");
        out[k] = mix(wv[k], zc[k], zf[k]);
    }
    return z;
}

Field asm_estimate(const ObservationSet& obs, const Grid& grid, const AsmParams& params,
                   const AsmOptions& opts) {
    params.validate();
    const Field z_free = apriori_field(obs, grid, params.c_free, params.sigma, params.tau, opts);
    const Field z_cong = apriori_field(obs, grid, params.c_cong, params.sigma, params.tau, opts);
    const Field w = weight_field(z_free, z_cong, params.v_thr, params.dv);
    return combine(w, z_cong, z_free);
}

AsmJacobian asm_estimate_with_jacobian(const ObservationSet& obs, const Grid& grid,
                                       const AsmParams& params, const AsmOptions& opts) {
    params.validate();
    check_inputs(obs, params.c_free);
    const double limit = exponent_limit(opts);
    const double fallback = obs.mean_value();
    const auto data = obs.observations();

    AsmJacobian jac{Field(grid, Quantity::speed), {}};
    for (auto& p : jac.partials) p.assign(grid.cells(), 0.0);

    const double inv_sigma = 1.0 / params.sigma;
    const double inv_tau = 1.0 / params.tau;
    const auto nx = static_cast<std::ptrdiff_t>(grid.nx);
#pragma omp parallel
    {
        std::vector<KernelSums> row_f, row_c;
#pragma omp for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < nx; ++ii) {
            const auto i = static_cast<std::size_t>(ii);
            accumulate_row<true>(data, grid, i, 1.0 / params.c_free, inv_sigma, inv_tau, limit, row_f);
            accumulate_row<true>(data, grid, i, 1.0 / params.c_cong, inv_sigma, inv_tau, limit, row_c);
            for (std::size_t j = 0; j < grid.nt; ++j) {
                const KernelSums& sf = row_f[j];
                const KernelSums& sc = row_c[j];

                // a-priori values and their partials w.r.t. (c, sigma, tau)
                auto resolve = [&](const KernelSums& s, double& z, std::array<double, 3>& dz) {
                    if (s.den > 0.0) {
                        z = s.num / s.den;
                        for (int q = 0; q < 3; ++q) dz[q] = (s.dnum[q] - z * s.dden[q]) / s.den;
                    } else {
                        z = fallback;
                        dz = {0.0, 0.0, 0.0};
                    }
                };
                double zf = 0.0, zc = 0.0;
                std::array<double, 3> dzf{}, dzc{};
                resolve(sf, zf, dzf);
                resolve(sc, zc, dzc);

                const double w = congestion_weight(zf, zc, params.v_thr, params.dv);
                const std::size_t k = i * grid.nt + j;
                jac.estimate.values()[k] = mix(w, zc, zf);

                const double u = (params.v_thr - std::min(zf, zc)) / params.dv;
                const double th = std::tanh(u);
                const double dw_du = 0.5 * (1.0 - th * th);
                const double gap = zc - zf;
                const double dw_dmin = -dw_du / params.dv;
                const bool cong_branch = zc <= zf;
                const double de_dzc = w + (cong_branch ? gap * dw_dmin : 0.0);
                const double de_dzf = (1.0 - w) + (cong_branch ? 0.0 : gap * dw_dmin);

                jac.partials[kCFree][k] = de_dzf * dzf[0];
                jac.partials[kCCong][k] = de_dzc * dzc[0];
                jac.partials[kVThr][k] = gap * dw_du / params.dv;
                jac.partials[kDv][k] = gap * (-dw_du * u / params.dv);
                jac.partials[kSigma][k] = de_dzf * dzf[1] + de_dzc * dzc[1];
                jac.partials[kTau][k] = de_dzf * dzf[2] + de_dzc * dzc[2];
            }
        }
    }
    return jac;
}

}  // namespace asnn
