#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "asr/rng.hpp"

namespace asr {

struct Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

/// Dense row-major f64 tensor with an optional gradient buffer of the same
/// shape. Gradients accumulate (+=) until zero_grad().
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;  // empty until first accumulation

    Tensor() = default;
    Tensor(std::vector<std::int64_t> s, std::vector<double> d, bool rg);

    static TensorPtr zeros(const std::vector<std::int64_t>& shape, bool requires_grad = false);
    static TensorPtr constant(const std::vector<std::int64_t>& shape, double value,
                              bool requires_grad = false);
    static TensorPtr uniform(const std::vector<std::int64_t>& shape, double lo, double hi,
                             Rng& rng, bool requires_grad = false);
    /// U(-1/sqrt(fan_in), +1/sqrt(fan_in)).
    static TensorPtr scaled_uniform(const std::vector<std::int64_t>& shape, std::int64_t fan_in,
                                    Rng& rng, bool requires_grad = false);
    static TensorPtr from(const std::vector<std::int64_t>& shape, std::vector<double> values,
                          bool requires_grad = false);

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
    std::int64_t ndim() const { return static_cast<std::int64_t>(shape.size()); }

    /// Row/column counts for the 2-D case (1-D tensors count as a single row).
    std::int64_t rows() const;
    std::int64_t cols() const;

    double& at(std::int64_t r, std::int64_t c);
    double at(std::int64_t r, std::int64_t c) const;

    void ensure_grad();
    void zero_grad();
    void add_to_grad(std::span<const double> g);

    bool all_finite() const;
};

std::int64_t shape_product(const std::vector<std::int64_t>& shape);

}  // namespace asr
