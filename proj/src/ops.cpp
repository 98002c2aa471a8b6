#include "asr/ops.hpp"

#include <cmath>
#include <string>

#include "asr/errors.hpp"

namespace asr::ops {

namespace {

void require_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape != b->shape) {
        throw ShapeError(std::string(op) + ": shape mismatch");
    }
}

using Fn = double (*)(double);

TensorPtr unary(Graph& g, const char* name, const TensorPtr& a, Fn fwd,
                double (*dfn)(double x, double y)) {
    auto out = Tensor::zeros(a->shape);
    for (std::int64_t i = 0; i < a->size(); ++i) {
        out->data[static_cast<std::size_t>(i)] = fwd(a->data[static_cast<std::size_t>(i)]);
    }
    return g.append(name, {a}, out, [a, out, dfn] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < a->data.size(); ++i) {
            a->grad[i] += dfn(a->data[i], out->data[i]) * out->grad[i];
        }
    });
}

}  // namespace

TensorPtr add(Graph& g, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "add");
    auto out = Tensor::zeros(a->shape);
    for (std::size_t i = 0; i < a->data.size(); ++i) out->data[i] = a->data[i] + b->data[i];
    return g.append("add", {a, b}, out, [a, b, out] {
        if (a->requires_grad) a->add_to_grad(out->grad);
        if (b->requires_grad) b->add_to_grad(out->grad);
    });
}

TensorPtr sub(Graph& g, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "sub");
    auto out = Tensor::zeros(a->shape);
    for (std::size_t i = 0; i < a->data.size(); ++i) out->data[i] = a->data[i] - b->data[i];
    return g.append("sub", {a, b}, out, [a, b, out] {
        if (a->requires_grad) a->add_to_grad(out->grad);
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < b->data.size(); ++i) b->grad[i] -= out->grad[i];
        }
    });
}

TensorPtr mul(Graph& g, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "mul");
    auto out = Tensor::zeros(a->shape);
    for (std::size_t i = 0; i < a->data.size(); ++i) out->data[i] = a->data[i] * b->data[i];
    return g.append("mul", {a, b}, out, [a, b, out] {
        if (a->requires_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->data.size(); ++i) a->grad[i] += b->data[i] * out->grad[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < b->data.size(); ++i) b->grad[i] += a->data[i] * out->grad[i];
        }
    });
}

TensorPtr scale(Graph& g, const TensorPtr& a, double c) {
    auto out = Tensor::zeros(a->shape);
    for (std::size_t i = 0; i < a->data.size(); ++i) out->data[i] = c * a->data[i];
    return g.append("scale", {a}, out, [a, out, c] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < a->data.size(); ++i) a->grad[i] += c * out->grad[i];
    });
}

TensorPtr scale_by(Graph& g, const TensorPtr& a, const TensorPtr& s) {
    if (s->size() != 1) throw ShapeError("scale_by: scale must be a 1-element tensor");
    const double c = s->data[0];
    auto out = Tensor::zeros(a->shape);
    for (std::size_t i = 0; i < a->data.size(); ++i) out->data[i] = c * a->data[i];
    return g.append("scale_by", {a, s}, out, [a, s, out] {
        const double c = s->data[0];
        if (a->requires_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->data.size(); ++i) a->grad[i] += c * out->grad[i];
        }
        if (s->requires_grad) {
            s->ensure_grad();
            double acc = 0.0;
            for (std::size_t i = 0; i < a->data.size(); ++i) acc += a->data[i] * out->grad[i];
            s->grad[0] += acc;
        }
    });
}

TensorPtr sigmoid(Graph& g, const TensorPtr& a) {
    return unary(
        g, "sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

TensorPtr tanh(Graph& g, const TensorPtr& a) {
    return unary(
        g, "tanh", a, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

TensorPtr relu_clip(Graph& g, const TensorPtr& a, double cap) {
    auto out = Tensor::zeros(a->shape);
    for (std::size_t i = 0; i < a->data.size(); ++i) {
        const double x = a->data[i];
        out->data[i] = x < 0.0 ? 0.0 : (x > cap ? cap : x);
    }
    return g.append("relu_clip", {a}, out, [a, out, cap] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < a->data.size(); ++i) {
            const double x = a->data[i];
            if (x > 0.0 && x < cap) a->grad[i] += out->grad[i];
        }
    });
}

TensorPtr exp(Graph& g, const TensorPtr& a) {
    return unary(
        g, "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

TensorPtr log(Graph& g, const TensorPtr& a) {
    for (double v : a->data) {
        if (!(v > 0.0)) throw DomainError("log: input must be positive");
    }
    return unary(
        g, "log", a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

TensorPtr matmul(Graph& g, const TensorPtr& a, const TensorPtr& b) {
    if (a->ndim() != 2 || b->ndim() != 2) throw ShapeError("matmul: expects 2-D tensors");
    const std::int64_t m = a->shape[0], k = a->shape[1], k2 = b->shape[0], n = b->shape[1];
    if (k != k2) throw ShapeError("matmul: inner dimensions disagree");
    auto out = Tensor::zeros({m, n});
    for (std::int64_t i = 0; i < m; ++i) {
        const double* arow = a->data.data() + i * k;
        double* orow = out->data.data() + i * n;
        for (std::int64_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = b->data.data() + kk * n;
            for (std::int64_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    return g.append("matmul", {a, b}, out, [a, b, out, m, k, n] {
        if (a->requires_grad) {
            a->ensure_grad();
            // dA += dC B^T
            for (std::int64_t i = 0; i < m; ++i) {
                const double* grow = out->grad.data() + i * n;
                double* garow = a->grad.data() + i * k;
                for (std::int64_t kk = 0; kk < k; ++kk) {
                    const double* brow = b->data.data() + kk * n;
                    double acc = 0.0;
                    for (std::int64_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
                    garow[kk] += acc;
                }
            }
        }
        if (b->requires_grad) {
            b->ensure_grad();
            // dB += A^T dC
            for (std::int64_t i = 0; i < m; ++i) {
                const double* arow = a->data.data() + i * k;
                const double* grow = out->grad.data() + i * n;
                for (std::int64_t kk = 0; kk < k; ++kk) {
                    const double av = arow[kk];
                    if (av == 0.0) continue;
                    double* gbrow = b->grad.data() + kk * n;
                    for (std::int64_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
                }
            }
        }
    });
}

TensorPtr add_bias(Graph& g, const TensorPtr& mat, const TensorPtr& bias) {
    if (mat->ndim() != 2) throw ShapeError("add_bias: matrix must be 2-D");
    const std::int64_t t = mat->shape[0], c = mat->shape[1];
    if (bias->size() != c) throw ShapeError("add_bias: bias width mismatch");
    auto out = Tensor::zeros(mat->shape);
    for (std::int64_t i = 0; i < t; ++i) {
        for (std::int64_t j = 0; j < c; ++j) {
            out->data[static_cast<std::size_t>(i * c + j)] =
                mat->data[static_cast<std::size_t>(i * c + j)] + bias->data[static_cast<std::size_t>(j)];
        }
    }
    return g.append("add_bias", {mat, bias}, out, [mat, bias, out, t, c] {
        if (mat->requires_grad) mat->add_to_grad(out->grad);
        if (bias->requires_grad) {
            bias->ensure_grad();
            for (std::int64_t i = 0; i < t; ++i) {
                for (std::int64_t j = 0; j < c; ++j) {
                    bias->grad[static_cast<std::size_t>(j)] += out->grad[static_cast<std::size_t>(i * c + j)];
                }
            }
        }
    });
}

TensorPtr softmax(Graph& g, const TensorPtr& v) {
    if (v->size() < 1) throw ShapeError("softmax: empty input");
    const std::int64_t rows = v->rows(), cols = v->cols();
    auto out = Tensor::zeros(v->shape);
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* x = v->data.data() + r * cols;
        double* y = out->data.data() + r * cols;
        double m = x[0];
        for (std::int64_t j = 1; j < cols; ++j) m = std::max(m, x[j]);
        double z = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) {
            y[j] = std::exp(x[j] - m);
            z += y[j];
        }
        for (std::int64_t j = 0; j < cols; ++j) y[j] /= z;
    }
    return g.append("softmax", {v}, out, [v, out, rows, cols] {
        if (!v->requires_grad) return;
        v->ensure_grad();
        for (std::int64_t r = 0; r < rows; ++r) {
            const double* y = out->data.data() + r * cols;
            const double* dy = out->grad.data() + r * cols;
            double dot = 0.0;
            for (std::int64_t j = 0; j < cols; ++j) dot += y[j] * dy[j];
            double* dx = v->grad.data() + r * cols;
            for (std::int64_t j = 0; j < cols; ++j) dx[j] += y[j] * (dy[j] - dot);
        }
    });
}

TensorPtr log_softmax(Graph& g, const TensorPtr& v) {
    if (v->size() < 1) throw ShapeError("log_softmax: empty input");
    const std::int64_t rows = v->rows(), cols = v->cols();
    auto out = Tensor::zeros(v->shape);
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* x = v->data.data() + r * cols;
        double* y = out->data.data() + r * cols;
        double m = x[0];
        for (std::int64_t j = 1; j < cols; ++j) m = std::max(m, x[j]);
        double z = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) z += std::exp(x[j] - m);
        const double lse = m + std::log(z);
        for (std::int64_t j = 0; j < cols; ++j) y[j] = x[j] - lse;
    }
    return g.append("log_softmax", {v}, out, [v, out, rows, cols] {
        if (!v->requires_grad) return;
        v->ensure_grad();
        for (std::int64_t r = 0; r < rows; ++r) {
            const double* y = out->data.data() + r * cols;
            const double* dy = out->grad.data() + r * cols;
            double total = 0.0;
            for (std::int64_t j = 0; j < cols; ++j) total += dy[j];
            double* dx = v->grad.data() + r * cols;
            for (std::int64_t j = 0; j < cols; ++j) dx[j] += dy[j] - std::exp(y[j]) * total;
        }
    });
}

TensorPtr masked_softmax(Graph& g, const TensorPtr& v, const std::vector<bool>& mask) {
    if (static_cast<std::int64_t>(mask.size()) != v->size()) {
        throw ShapeError("masked_softmax: mask size mismatch");
    }
    bool any = false;
    for (bool b : mask) any = any || b;
    if (!any) throw ContractError("masked_softmax: mask selects nothing");
    auto out = Tensor::zeros(v->shape);
    double m = -HUGE_VAL;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) m = std::max(m, v->data[i]);
    }
    double z = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) {
            out->data[i] = std::exp(v->data[i] - m);
            z += out->data[i];
        }
    }
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) out->data[i] /= z;
    }
    return g.append("masked_softmax", {v}, out, [v, out, mask] {
        if (!v->requires_grad) return;
        v->ensure_grad();
        double dot = 0.0;
        for (std::size_t i = 0; i < mask.size(); ++i) dot += out->data[i] * out->grad[i];
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (mask[i]) v->grad[i] += out->data[i] * (out->grad[i] - dot);
        }
    });
}

TensorPtr sum(Graph& g, const TensorPtr& a) {
    double s = 0.0;
    for (double v : a->data) s += v;
    auto out = Tensor::from({1}, {s});
    return g.append("sum", {a}, out, [a, out] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        const double d = out->grad[0];
        for (auto& gv : a->grad) gv += d;
    });
}

TensorPtr row(Graph& g, const TensorPtr& a, std::int64_t r) {
    if (a->ndim() != 2) throw ShapeError("row: expects 2-D tensor");
    const std::int64_t t = a->shape[0], c = a->shape[1];
    if (r < 0 || r >= t) throw ShapeError("row: index out of range");
    auto out = Tensor::zeros({1, c});
    for (std::int64_t j = 0; j < c; ++j) out->data[static_cast<std::size_t>(j)] = a->at(r, j);
    return g.append("row", {a}, out, [a, out, r, c] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::int64_t j = 0; j < c; ++j) {
            a->grad[static_cast<std::size_t>(r * c + j)] += out->grad[static_cast<std::size_t>(j)];
        }
    });
}

TensorPtr col(Graph& g, const TensorPtr& a, std::int64_t c) {
    if (a->ndim() != 2) throw ShapeError("col: expects 2-D tensor");
    const std::int64_t t = a->shape[0], w = a->shape[1];
    if (c < 0 || c >= w) throw ShapeError("col: index out of range");
    auto out = Tensor::zeros({t, 1});
    for (std::int64_t i = 0; i < t; ++i) out->data[static_cast<std::size_t>(i)] = a->at(i, c);
    return g.append("col", {a}, out, [a, out, c, t, w] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::int64_t i = 0; i < t; ++i) {
            a->grad[static_cast<std::size_t>(i * w + c)] += out->grad[static_cast<std::size_t>(i)];
        }
    });
}

TensorPtr element(Graph& g, const TensorPtr& a, std::int64_t i) {
    if (i < 0 || i >= a->size()) throw ShapeError("element: index out of range");
    auto out = Tensor::from({1}, {a->data[static_cast<std::size_t>(i)]});
    return g.append("element", {a}, out, [a, out, i] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        a->grad[static_cast<std::size_t>(i)] += out->grad[0];
    });
}

TensorPtr reverse_rows(Graph& g, const TensorPtr& a) {
    if (a->ndim() != 2) throw ShapeError("reverse_rows: expects 2-D tensor");
    const std::int64_t t = a->shape[0], c = a->shape[1];
    auto out = Tensor::zeros(a->shape);
    for (std::int64_t i = 0; i < t; ++i) {
        for (std::int64_t j = 0; j < c; ++j) out->at(i, j) = a->at(t - 1 - i, j);
    }
    return g.append("reverse_rows", {a}, out, [a, out, t, c] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::int64_t i = 0; i < t; ++i) {
            for (std::int64_t j = 0; j < c; ++j) {
                a->grad[static_cast<std::size_t>((t - 1 - i) * c + j)] +=
                    out->grad[static_cast<std::size_t>(i * c + j)];
            }
        }
    });
}

TensorPtr rowwise_dot(Graph& g, const TensorPtr& a, const TensorPtr& b) {
    require_same_shape(a, b, "rowwise_dot");
    if (a->ndim() != 2) throw ShapeError("rowwise_dot: expects 2-D tensors");
    const std::int64_t t = a->shape[0], c = a->shape[1];
    auto out = Tensor::zeros({t, 1});
    for (std::int64_t i = 0; i < t; ++i) {
        double acc = 0.0;
        for (std::int64_t j = 0; j < c; ++j) acc += a->at(i, j) * b->at(i, j);
        out->data[static_cast<std::size_t>(i)] = acc;
    }
    return g.append("rowwise_dot", {a, b}, out, [a, b, out, t, c] {
        for (std::int64_t i = 0; i < t; ++i) {
            const double d = out->grad[static_cast<std::size_t>(i)];
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::int64_t j = 0; j < c; ++j) {
                    a->grad[static_cast<std::size_t>(i * c + j)] += d * b->at(i, j);
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::int64_t j = 0; j < c; ++j) {
                    b->grad[static_cast<std::size_t>(i * c + j)] += d * a->at(i, j);
                }
            }
        }
    });
}

TensorPtr scale_rows(Graph& g, const TensorPtr& a, const TensorPtr& s) {
    if (a->ndim() != 2) throw ShapeError("scale_rows: expects 2-D tensor");
    const std::int64_t t = a->shape[0], c = a->shape[1];
    if (s->size() != t) throw ShapeError("scale_rows: scale length must equal row count");
    auto out = Tensor::zeros(a->shape);
    for (std::int64_t i = 0; i < t; ++i) {
        const double f = s->data[static_cast<std::size_t>(i)];
        for (std::int64_t j = 0; j < c; ++j) out->at(i, j) = f * a->at(i, j);
    }
    return g.append("scale_rows", {a, s}, out, [a, s, out, t, c] {
        for (std::int64_t i = 0; i < t; ++i) {
            const double f = s->data[static_cast<std::size_t>(i)];
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::int64_t j = 0; j < c; ++j) {
                    a->grad[static_cast<std::size_t>(i * c + j)] +=
                        f * out->grad[static_cast<std::size_t>(i * c + j)];
                }
            }
            if (s->requires_grad) {
                s->ensure_grad();
                double acc = 0.0;
                for (std::int64_t j = 0; j < c; ++j) {
                    acc += a->at(i, j) * out->grad[static_cast<std::size_t>(i * c + j)];
                }
                s->grad[static_cast<std::size_t>(i)] += acc;
            }
        }
    });
}

TensorPtr concat_cols(Graph& g, const std::vector<TensorPtr>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    const std::int64_t t = parts[0]->shape[0];
    std::int64_t total = 0;
    for (const auto& p : parts) {
        if (p->ndim() != 2 || p->shape[0] != t) {
            throw ShapeError("concat_cols: row counts disagree");
        }
        total += p->shape[1];
    }
    auto out = Tensor::zeros({t, total});
    std::int64_t off = 0;
    for (const auto& p : parts) {
        const std::int64_t w = p->shape[1];
        for (std::int64_t i = 0; i < t; ++i) {
            for (std::int64_t j = 0; j < w; ++j) out->at(i, off + j) = p->at(i, j);
        }
        off += w;
    }
    return g.append("concat_cols", parts, out, [parts, out, t, total] {
        std::int64_t off = 0;
        for (const auto& p : parts) {
            const std::int64_t w = p->shape[1];
            if (p->requires_grad) {
                p->ensure_grad();
                for (std::int64_t i = 0; i < t; ++i) {
                    for (std::int64_t j = 0; j < w; ++j) {
                        p->grad[static_cast<std::size_t>(i * w + j)] +=
                            out->grad[static_cast<std::size_t>(i * total + off + j)];
                    }
                }
            }
            off += w;
        }
    });
}

}  // namespace asr::ops
