#include "asr/tensor.hpp"

#include <cmath>
#include <string>

#include "asr/errors.hpp"

namespace asr {

namespace {
void check_shape(const std::vector<std::int64_t>& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
    for (auto d : shape) {
        if (d < 1) {
            throw ShapeError("tensor dimensions must be positive, got " + std::to_string(d));
        }
    }
}
}  // namespace

std::int64_t shape_product(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<std::int64_t> s, std::vector<double> d, bool rg)
    : shape(std::move(s)), data(std::move(d)), requires_grad(rg) {
    check_shape(shape);
    if (shape_product(shape) != size()) {
        throw ShapeError("tensor data length does not match shape");
    }
}

TensorPtr Tensor::zeros(const std::vector<std::int64_t>& shape, bool requires_grad) {
    check_shape(shape);
    return std::make_shared<Tensor>(shape,
                                    std::vector<double>(static_cast<std::size_t>(shape_product(shape)), 0.0),
                                    requires_grad);
}

TensorPtr Tensor::constant(const std::vector<std::int64_t>& shape, double value, bool requires_grad) {
    check_shape(shape);
    return std::make_shared<Tensor>(shape,
                                    std::vector<double>(static_cast<std::size_t>(shape_product(shape)), value),
                                    requires_grad);
}

TensorPtr Tensor::uniform(const std::vector<std::int64_t>& shape, double lo, double hi, Rng& rng,
                          bool requires_grad) {
    check_shape(shape);
    if (!(lo < hi)) throw ContractError("uniform init requires lo < hi");
    std::vector<double> d(static_cast<std::size_t>(shape_product(shape)));
    for (auto& v : d) v = rng.uniform(lo, hi);
    return std::make_shared<Tensor>(shape, std::move(d), requires_grad);
}

TensorPtr Tensor::scaled_uniform(const std::vector<std::int64_t>& shape, std::int64_t fan_in,
                                 Rng& rng, bool requires_grad) {
    if (fan_in < 1) throw ContractError("scaled_uniform requires fan_in >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    return uniform(shape, -bound, bound, rng, requires_grad);
}

TensorPtr Tensor::from(const std::vector<std::int64_t>& shape, std::vector<double> values,
                       bool requires_grad) {
    return std::make_shared<Tensor>(shape, std::move(values), requires_grad);
}

std::int64_t Tensor::rows() const { return ndim() == 1 ? 1 : shape[0]; }

std::int64_t Tensor::cols() const { return ndim() == 1 ? shape[0] : shape[ndim() - 1]; }

double& Tensor::at(std::int64_t r, std::int64_t c) {
    return data[static_cast<std::size_t>(r * cols() + c)];
}

double Tensor::at(std::int64_t r, std::int64_t c) const {
    return data[static_cast<std::size_t>(r * cols() + c)];
}

void Tensor::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
}

void Tensor::add_to_grad(std::span<const double> g) {
    if (g.size() != data.size()) throw ShapeError("gradient size does not match tensor");
    ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace asr
