#include "asnn/cost.hpp"

#include <cmath>

#include "asnn/errors.hpp"

namespace asnn {

ConvKernel::ConvKernel(std::size_t rows, std::size_t cols, std::vector<double> weights)
    : rows_(rows), cols_(cols), weights_(std::move(weights)) {
    if (rows_ % 2 == 0 || cols_ % 2 == 0) throw ConfigError("kernel dimensions must be odd");
    if (weights_.size() != rows_ * cols_)
        throw ShapeError("kernel weight count does not match its dimensions");
}

ConvKernel ConvKernel::standard() {
    return ConvKernel(3, 3, {-1, 0, 0,  //
                             -1, 3, 0,  //
                             -1, 0, 0});
}

double data_loss(const Field& est, const Field& truth, const Mask& mask) {
    require_same_grid(est.grid(), truth.grid(), "data_loss");
    require_same_grid(est.grid(), mask.grid(), "data_loss");
    const std::size_t m = mask.count();
    if (m == 0) throw DataError("data_loss: empty mask");
    auto e = est.values();
    auto z = truth.values();
    auto bits = mask.bits();
    double ss = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
        if (!bits[k]) continue;
        const double r = e[k] - z[k];
        ss += r * r;
    }
    return std::sqrt(ss) / std::sqrt(static_cast<double>(m));
}

Field convolve(const Field& est, const ConvKernel& kernel) {
    const Grid& g = est.grid();
    const auto a = static_cast<std::ptrdiff_t>(kernel.a());
    const auto b = static_cast<std::ptrdiff_t>(kernel.b());
    const auto nx = static_cast<std::ptrdiff_t>(g.nx);
    const auto nt = static_cast<std::ptrdiff_t>(g.nt);
    Field out(g, est.quantity());
    for (std::ptrdiff_t x = 0; x < nx; ++x) {
        for (std::ptrdiff_t t = 0; t < nt; ++t) {
            double s = 0.0;
            for (std::ptrdiff_t r = -a; r <= a; ++r) {
                const std::ptrdiff_t xx = x + r;
                if (xx < 0 || xx >= nx) continue;
                for (std::ptrdiff_t c = -b; c <= b; ++c) {
                    const std::ptrdiff_t tt = t + c;
                    if (tt < 0 || tt >= nt) continue;
                    const double w = kernel(static_cast<std::size_t>(r + a), static_cast<std::size_t>(c + b));
                    if (w != 0.0) s += w * est(static_cast<std::size_t>(xx), static_cast<std::size_t>(tt));
                }
            }
            out(static_cast<std::size_t>(x), static_cast<std::size_t>(t)) = s;
        }
    }
    return out;
}

namespace {

double norm_j(const Grid& g) { return std::sqrt(static_cast<double>(g.cells())); }

}  // namespace

double conv_penalty(const Field& est, const ConvKernel& kernel) {
    const Field conv = convolve(est, kernel);
    double s = 0.0;
    for (double v : conv.values()) s += std::abs(v);
    return s / norm_j(est.grid());
}

double penalty(const Field& est, const CostConfig& cfg) {
    if (cfg.kind == CostKind::convolution) return conv_penalty(est, cfg.kernel);
    return physics_residual(est, cfg.fd, cfg.residual_form) / norm_j(est.grid());
}

double total_cost(const Field& est, const Field& truth, const Mask& mask, const CostConfig& cfg) {
    if (!(cfg.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    const double fit = data_loss(est, truth, mask);
    if (cfg.lambda == 0.0) return fit;
    return fit + cfg.lambda * penalty(est, cfg);
}

CostGradient total_cost_gradient(const Field& est, const Field& truth, const Mask& mask,
                                 const CostConfig& cfg) {
    CostGradient out;
    out.value = total_cost(est, truth, mask, cfg);
    const Grid& g = est.grid();
    out.d_est.assign(g.cells(), 0.0);

    // data term: r / (sqrt(m) * ||r||) on masked cells
    auto e = est.values();
    auto z = truth.values();
    auto bits = mask.bits();
    double ss = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k)
        if (bits[k]) ss += (e[k] - z[k]) * (e[k] - z[k]);
    const double norm_r = std::sqrt(ss);
    if (norm_r > 0.0) {
        const double scale = 1.0 / (norm_r * std::sqrt(static_cast<double>(mask.count())));
        for (std::size_t k = 0; k < e.size(); ++k)
            if (bits[k]) out.d_est[k] = (e[k] - z[k]) * scale;
    }
    if (cfg.lambda == 0.0) return out;

    const double scale = cfg.lambda / norm_j(g);
    if (cfg.kind == CostKind::convolution) {
        // Adjoint of the stencil: each response spreads sign(response) back
        // onto the cells it read.
        const Field conv = convolve(est, cfg.kernel);
        const auto a = static_cast<std::ptrdiff_t>(cfg.kernel.a());
        const auto b = static_cast<std::ptrdiff_t>(cfg.kernel.b());
        const auto nx = static_cast<std::ptrdiff_t>(g.nx);
        const auto nt = static_cast<std::ptrdiff_t>(g.nt);
        for (std::ptrdiff_t x = 0; x < nx; ++x) {
            for (std::ptrdiff_t t = 0; t < nt; ++t) {
                const double v = conv(static_cast<std::size_t>(x), static_cast<std::size_t>(t));
                if (v == 0.0) continue;
                const double sgn = v > 0.0 ? scale : -scale;
                for (std::ptrdiff_t r = -a; r <= a; ++r) {
                    const std::ptrdiff_t xx = x + r;
                    if (xx < 0 || xx >= nx) continue;
                    for (std::ptrdiff_t c = -b; c <= b; ++c) {
                        const std::ptrdiff_t tt = t + c;
                        if (tt < 0 || tt >= nt) continue;
                        out.d_est[static_cast<std::size_t>(xx * nt + tt)] +=
                            sgn * cfg.kernel(static_cast<std::size_t>(r + a), static_cast<std::size_t>(c + b));
                    }
                }
            }
        }
    } else {
        const ResidualGradient rg = physics_residual_gradient(est, cfg.fd, cfg.residual_form);
        for (std::size_t k = 0; k < rg.d_speed.size(); ++k) out.d_est[k] += scale * rg.d_speed[k];
    }
    return out;
}

double relative_error(const Field& est, const Field& truth) {
    require_same_grid(est.grid(), truth.grid(), "relative_error");
    auto e = est.values();
    auto z = truth.values();
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < e.size(); ++k) {
        num += (e[k] - z[k]) * (e[k] - z[k]);
        den += z[k] * z[k];
    }
    if (!(den > 0.0)) throw DataError("relative_error: truth has zero norm");
    return std::sqrt(num) / std::sqrt(den);
}

}  // namespace asnn
