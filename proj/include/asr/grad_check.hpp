#pragma once

#include <functional>
#include <vector>

#include "asr/graph.hpp"

namespace asr {

/// Compares the tape's gradients against central finite differences.
///
/// `build_loss` must construct the forward pass on the given graph and return
/// a scalar loss; it is re-evaluated with perturbed parameters, so it has to
/// be a pure function of `params`. Returns the max of
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8) over all
/// coordinates; +inf if any evaluation produced a non-finite loss.
double grad_check(const std::function<TensorPtr(Graph&)>& build_loss,
                  const std::vector<TensorPtr>& params, double eps = 1e-5);

}  // namespace asr
