#ifndef ASNN_COST_HPP
#define ASNN_COST_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "asnn/grid.hpp"
#include "asnn/lwr.hpp"

namespace asnn {

/**
 * Odd-sized stencil used by the smoothness penalty. Entry (r, c) multiplies
 * Z(x + r - a, t + c - b): rows run along space, columns along time, and the
 * first column looks one step into the past.
 */
class ConvKernel {
public:
    ConvKernel(std::size_t rows, std::size_t cols, std::vector<double> weights);

    /// [[-1, 0, 0], [-1, 3, 0], [-1, 0, 0]]: the current cell against its
    /// three neighbours at the previous time step.
    static ConvKernel standard();

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t a() const { return rows_ / 2; }
    std::size_t b() const { return cols_ / 2; }
    double operator()(std::size_t r, std::size_t c) const { return weights_[r * cols_ + c]; }
    const std::vector<double>& weights() const { return weights_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> weights_;
};

enum class CostKind { convolution, physics };

/// Candidate regularization weights swept by the CLI grid search.
inline constexpr std::array<double, 7> kLambdaCandidates = {10.0, 5.0, 1.0, 0.5, 0.1, 0.05, 0.01};

struct CostConfig {
    double lambda = 0.01;
    CostKind kind = CostKind::convolution;
    ConvKernel kernel = ConvKernel::standard();
    FundamentalDiagram fd = FundamentalDiagram::standard();
    ResidualForm residual_form = ResidualForm::conservative;
};

/// ||P(est - truth)||_F / ||P(J)||_F over the masked cells.
double data_loss(const Field& est, const Field& truth, const Mask& mask);

/// Stencil response at every cell, zero padded outside the field.
Field convolve(const Field& est, const ConvKernel& kernel);

/// sum |kernel * est| / sqrt(nx * nt).
double conv_penalty(const Field& est, const ConvKernel& kernel);

/// Regularizer term before multiplication by lambda (already normalized by ||J||_F).
double penalty(const Field& est, const CostConfig& cfg);

double total_cost(const Field& est, const Field& truth, const Mask& mask, const CostConfig& cfg);

/// total_cost together with its gradient with respect to every cell of est.
struct CostGradient {
    double value = 0.0;
    std::vector<double> d_est;
};

CostGradient total_cost_gradient(const Field& est, const Field& truth, const Mask& mask,
                                 const CostConfig& cfg);

/// ||est - truth||_F / ||truth||_F.
double relative_error(const Field& est, const Field& truth);

}  // namespace asnn

#endif  // ASNN_COST_HPP
