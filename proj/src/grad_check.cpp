#include "asr/grad_check.hpp"

#include <cmath>
#include <limits>

namespace asr {

double grad_check(const std::function<TensorPtr(Graph&)>& build_loss,
                  const std::vector<TensorPtr>& params, double eps) {
    for (const auto& p : params) {
        p->requires_grad = true;
        p->ensure_grad();
        p->zero_grad();
    }

    {
        Graph g;
        auto loss = build_loss(g);
        g.backward(loss);
    }

    auto eval = [&]() -> double {
        Graph g;
        return build_loss(g)->data[0];
    };

    double max_rel = 0.0;
    for (const auto& p : params) {
        for (std::size_t i = 0; i < p->data.size(); ++i) {
            const double saved = p->data[i];
            p->data[i] = saved + eps;
            const double f_plus = eval();
            p->data[i] = saved - eps;
            const double f_minus = eval();
            p->data[i] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
                return std::numeric_limits<double>::infinity();
            }
            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            const double analytic = p->grad[i];
            const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
            max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace asr
