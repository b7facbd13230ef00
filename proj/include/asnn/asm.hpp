#ifndef ASNN_ASM_HPP
#define ASNN_ASM_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "asnn/grid.hpp"

namespace asnn {

/// Position of each trainable parameter in a flattened parameter vector.
enum ParamIndex : std::size_t {
    kCFree = 0,
    kCCong = 1,
    kVThr = 2,
    kDv = 3,
    kSigma = 4,
    kTau = 5,
    kNumParams = 6,
};

inline constexpr std::array<std::string_view, kNumParams> kParamNames = {
    "c_free", "c_cong", "v_thr", "dv", "sigma", "tau"};

/**
 * The six free parameters of the adaptive smoothing method, SI units.
 *
 * c_free and c_cong are the characteristic wave speeds of the free-flow and
 * congested regimes (c_free > 0 downstream, c_cong < 0 upstream); v_thr and
 * dv shape the tanh switch between the two a-priori fields; sigma and tau
 * are the spatial and temporal smoothing widths.
 */
struct AsmParams {
    double c_free = 0.0;
    double c_cong = 0.0;
    double v_thr = 0.0;
    double dv = 0.0;
    double sigma = 0.0;
    double tau = 0.0;

    /// Typical values: c_cong = -15 km/h, c_free = 80 km/h, v_thr = 60 km/h,
    /// dv = 20 km/h, sigma and tau half the detector spacing / sampling time.
    static AsmParams typical(double detector_spacing, double sampling_period);

    std::array<double, kNumParams> to_array() const;
    static AsmParams from_array(const std::array<double, kNumParams>& a);

    /// Throws DomainError unless every sign constraint holds.
    void validate() const;

    bool operator==(const AsmParams&) const = default;
};

struct AsmOptions {
    /// Observations whose kernel exponent |dx|/sigma + |dt|/tau exceeds this
    /// value are skipped. The neglected weight is at most exp(-cutoff) per
    /// observation. Empty means full summation.
    std::optional<double> cutoff;
};

/// exp(-|dx|/sigma - |dt|/tau).
double kernel_phi(double dx, double dt, double sigma, double tau);

/// Characteristic-shifted smoothed field evaluated at every cell centre.
Field apriori_field(const ObservationSet& obs, const Grid& grid, double c, double sigma,
                    double tau, const AsmOptions& opts = {});

/// Congestion weight 0.5 * (1 + tanh((v_thr - min(z_free, z_cong)) / dv)).
Field weight_field(const Field& z_free, const Field& z_cong, double v_thr, double dv);

/// w .* z_cong + (1 - w) .* z_free.
Field combine(const Field& w, const Field& z_cong, const Field& z_free);

Field asm_estimate(const ObservationSet& obs, const Grid& grid, const AsmParams& params,
                   const AsmOptions& opts = {});

/**
 * Estimate together with its per-cell partial derivatives with respect to
 * each parameter. `estimate` is bitwise identical to asm_estimate().
 *
 * On exact ties z_free == z_cong the min() is differentiated along the
 * congested branch.
 */
struct AsmJacobian {
    Field estimate;
    std::array<std::vector<double>, kNumParams> partials;
};

AsmJacobian asm_estimate_with_jacobian(const ObservationSet& obs, const Grid& grid,
                                       const AsmParams& params, const AsmOptions& opts = {});

}  // namespace asnn

#endif  // ASNN_ASM_HPP
