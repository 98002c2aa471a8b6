#include "asr/optimizer.hpp"

#include <cmath>

#include "asr/errors.hpp"

namespace asr {

Optimizer::Optimizer(OptimizerOptions options, const ModelParams& params, FreezeMask mask)
    : opt_(std::move(options)), mask_(std::move(mask)) {
    for (const auto& path : mask_) {
        if (!params.has(path)) {
            throw ConfigError("freeze mask names unknown parameter: " + path);
        }
    }
    for (const auto& [path, t] : params.values) {
        if (mask_.count(path)) continue;
        m_[path].assign(t->data.size(), 0.0);
        if (opt_.kind == OptKind::Adam) v_[path].assign(t->data.size(), 0.0);
    }
}

void Optimizer::step(ModelParams& params) {
    // Validate gradients and measure the global norm over unfrozen params.
    double sq_norm = 0.0;
    for (const auto& [path, t] : params.values) {
        if (mask_.count(path)) continue;
        t->ensure_grad();
        for (double gv : t->grad) {
            if (!std::isfinite(gv)) {
                throw TrainAbortError("non-finite gradient in parameter " + path);
            }
            sq_norm += gv * gv;
        }
    }
    double scale = 1.0;
    if (opt_.grad_clip > 0.0) {
        const double norm = std::sqrt(sq_norm);
        if (norm > opt_.grad_clip) scale = opt_.grad_clip / norm;
    }

    ++step_count_;
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(step_count_));

    for (auto& [path, t] : params.values) {
        if (mask_.count(path)) continue;
        auto& m = m_[path];
        if (opt_.kind == OptKind::SgdMomentum) {
            for (std::size_t i = 0; i < t->data.size(); ++i) {
                const double g = scale * t->grad[i];
                m[i] = opt_.momentum * m[i] + g;
                t->data[i] -= opt_.lr * m[i];
            }
        } else {
            auto& v = v_[path];
            for (std::size_t i = 0; i < t->data.size(); ++i) {
                const double g = scale * t->grad[i];
                m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * g;
                v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * g * g;
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                t->data[i] -= opt_.lr * mhat / (std::sqrt(vhat) + opt_.eps);
            }
        }
        if (path == "atten.R") {
            for (auto& w : t->data) {
                if (w < 0.0) w = 0.0;
            }
        }
    }
}

}  // namespace asr
