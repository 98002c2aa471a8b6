#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "asr/model.hpp"

namespace asr {

enum class OptKind { SgdMomentum, Adam };

struct OptimizerOptions {
    OptKind kind = OptKind::Adam;
    double lr = 3e-4;
    double momentum = 0.9;   // sgd
    double beta1 = 0.9;      // adam
    double beta2 = 0.999;
    double eps = 1e-8;
    double grad_clip = 5.0;  // global-norm clip over unfrozen gradients; <=0 disables
};

/// Parameter paths excluded from updates; every path must exist in the params.
using FreezeMask = std::set<std::string>;

/// Per-parameter update state. Moment buffers exist exactly for the unfrozen
/// parameters. Frozen parameters are left bit-identical by step().
class Optimizer {
public:
    Optimizer(OptimizerOptions options, const ModelParams& params, FreezeMask mask = {});

    /// Applies one update from the accumulated gradients. Throws
    /// TrainAbortError naming the parameter on a non-finite gradient. atten.R
    /// is clamped at 0 after the update (non-negativity projection).
    void step(ModelParams& params);

    std::int64_t step_count() const { return step_count_; }

private:
    OptimizerOptions opt_;
    FreezeMask mask_;
    std::map<std::string, std::vector<double>> m_;
    std::map<std::string, std::vector<double>> v_;  // adam second moment
    std::int64_t step_count_ = 0;
};

}  // namespace asr
