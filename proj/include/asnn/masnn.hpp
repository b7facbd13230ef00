#ifndef ASNN_MASNN_HPP
#define ASNN_MASNN_HPP

#include <vector>

#include "asnn/asm.hpp"
#include "asnn/trainer.hpp"

namespace asnn {

/// Ensemble of ASM branches joined by a convex combination whose weights
/// are the normalized exponentials of `logits`.
struct Ensemble {
    std::vector<AsmParams> branches;
    std::vector<double> logits;

    /// Uniform weights (all-zero logits).
    static Ensemble uniform(std::vector<AsmParams> branches);

    std::vector<double> weights() const;
    void validate() const;
};

/// Normalized exponentials, computed with the maximum subtracted.
std::vector<double> softmax(const std::vector<double>& logits);

/// Branch initializations that share every parameter but tau.
struct InitGrid {
    std::vector<double> tau_values;
    AsmParams shared;

    std::vector<AsmParams> branches() const;
    void validate() const;
};

Field masnn_forward(const Ensemble& ens, const ObservationSet& obs, const Grid& grid,
                    const AsmOptions& opts = {});

/// Joint objective over all branch parameters and the logits.
class MasnnObjective {
public:
    explicit MasnnObjective(const AsnnObjective& base) : base_(base) {}

    Field forward(const Ensemble& ens) const;
    double cost(const Ensemble& ens) const;
    /// Gradient laid out as [branch 0 params, branch 1 params, ..., logits].
    std::vector<double> gradient(const Ensemble& ens, GradMode mode, double eps) const;

private:
    const AsnnObjective& base_;
};

struct MasnnReport {
    Ensemble ensemble;
    TrainReport joint;
    /// Each branch trained alone from its initialization.
    std::vector<TrainReport> single_branch;
    /// True when the joint run from uniform logits ended above the best
    /// single-branch cost and the result comes from the restart at that
    /// branch's vertex of the simplex.
    bool vertex_restart = false;
};

/**
 * Trains branch parameters and combination logits together. The joint
 * descent starts from the initializations with uniform weights; if it ends
 * worse than the best branch trained on its own, a second joint descent is
 * started from the trained branches with the logits concentrated on the
 * best one, so the final cost never exceeds that branch's cost.
 */
MasnnReport train_masnn(const ObservationSet& obs, const Grid& grid, const CostConfig& cfg,
                        const TrainConfig& tcfg, const InitGrid& inits);

MasnnReport train_masnn(const AsnnObjective& objective, const TrainConfig& tcfg,
                        const std::vector<AsmParams>& inits);

}  // namespace asnn

#endif  // ASNN_MASNN_HPP
