#include "asr/model.hpp"

#include <cmath>
#include <numeric>

#include "asr/errors.hpp"

namespace asr {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LabelSeq text_to_labels(const std::string& text, const std::string& symbols) {
    LabelSeq out;
    out.reserve(text.size());
    for (char c : text) {
        const auto pos = symbols.find(c);
        if (pos == std::string::npos) {
            throw ConfigError(std::string("character '") + c + "' is not in the alphabet");
        }
        out.push_back(static_cast<int>(pos) + 1);
    }
    return out;
}

std::string labels_to_text(const LabelSeq& labels, const std::string& symbols) {
    std::string out;
    out.reserve(labels.size());
    for (int idx : labels) {
        if (idx < 1 || idx > static_cast<int>(symbols.size())) {
            throw ConfigError("label index " + std::to_string(idx) + " outside the alphabet");
        }
        out.push_back(symbols[static_cast<std::size_t>(idx - 1)]);
    }
    return out;
}

void validate_attention(const AttentionSpec& spec) {
    if (const auto* m = std::get_if<ManualAttention>(&spec)) {
        int total = 0;
        for (int s : m->sixths) {
            if (s < 0 || s > 6) throw ConfigError("manual attention weights must be sixths in [0,1]");
            total += s;
        }
        if (total != 6) throw ConfigError("manual attention weights must sum to 1 (six sixths)");
    } else if (const auto* l = std::get_if<LearnableAttention>(&spec)) {
        int total = 0;
        for (int c : l->columns) {
            if (c < 0) throw ConfigError("learnable attention column sizes must be non-negative");
            total += c;
        }
        if (total < 1) throw ConfigError("learnable attention needs at least one representative");
    } else if (const auto* c = std::get_if<ConditionalAttention>(&spec)) {
        if (c->proj_dim < 1) throw ConfigError("conditional attention needs proj_dim >= 1");
    }
}

std::string attention_label(const AttentionSpec& spec) {
    if (std::holds_alternative<IdentityAttention>(spec)) return "identity";
    if (const auto* m = std::get_if<ManualAttention>(&spec)) {
        return "M-" + std::to_string(m->sixths[0]) + "/6-" + std::to_string(m->sixths[1]) + "/6-" +
               std::to_string(m->sixths[2]) + "/6";
    }
    if (const auto* l = std::get_if<LearnableAttention>(&spec)) {
        return "L-" + std::to_string(l->columns[0]) + "-" + std::to_string(l->columns[1]) + "-" +
               std::to_string(l->columns[2]);
    }
    const auto& c = std::get<ConditionalAttention>(spec);
    return "cond-" + std::to_string(c.proj_dim);
}

void ModelConfig::validate() const {
    if (feature_dim < 1) throw ConfigError("feature_dim must be positive");
    if (gru_hidden < 1) throw ConfigError("gru_hidden must be positive");
    if (num_gru != 3) throw ConfigError("the architecture is fixed at three GRU layers");
    if (conv.kernel_width < 1 || conv.stride < 1) throw ConfigError("bad conv kernel/stride");
    if (symbols.empty()) throw ConfigError("alphabet symbols must be non-empty");
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (symbols.find(symbols[i], i + 1) != std::string::npos) {
            throw ConfigError("alphabet contains a duplicate symbol");
        }
    }
    validate_attention(attention);
}

const TensorPtr& ModelParams::at(const std::string& path) const {
    auto it = values.find(path);
    if (it == values.end()) throw ConfigError("unknown parameter path: " + path);
    return it->second;
}

std::int64_t ModelParams::scalar_count() const {
    std::int64_t n = 0;
    for (const auto& [_, t] : values) n += t->size();
    return n;
}

std::vector<std::pair<std::string, std::vector<std::int64_t>>> param_shapes(const ModelConfig& cfg) {
    cfg.validate();
    const std::int64_t f = cfg.feature_dim;
    const std::int64_t c = cfg.conv_channels();
    const std::int64_t h = cfg.gru_hidden;
    const std::int64_t a = cfg.alphabet_size();

    std::vector<std::pair<std::string, std::vector<std::int64_t>>> shapes;
    shapes.emplace_back("conv.w", std::vector<std::int64_t>{c, cfg.conv.kernel_width, f});
    shapes.emplace_back("conv.b", std::vector<std::int64_t>{1, c});
    for (int n = 1; n <= 3; ++n) {
        const std::int64_t d_in = (n == 1) ? c : h;
        for (const char* dir : {"fwd", "bwd"}) {
            for (const char* gate : {"reset", "update", "candidate"}) {
                const std::string base = "gru" + std::to_string(n) + "." + dir + "." + gate;
                shapes.emplace_back(base + ".w", std::vector<std::int64_t>{d_in, h});
                shapes.emplace_back(base + ".u", std::vector<std::int64_t>{h, h});
                shapes.emplace_back(base + ".b", std::vector<std::int64_t>{1, h});
            }
        }
    }
    if (const auto* l = std::get_if<LearnableAttention>(&cfg.attention)) {
        const std::int64_t r = l->columns[0] + l->columns[1] + l->columns[2];
        shapes.emplace_back("atten.R", std::vector<std::int64_t>{1, r});
    } else if (const auto* cond = std::get_if<ConditionalAttention>(&cfg.attention)) {
        shapes.emplace_back("atten.phi.w", std::vector<std::int64_t>{h, cond->proj_dim});
        shapes.emplace_back("atten.phi.b", std::vector<std::int64_t>{1, cond->proj_dim});
        shapes.emplace_back("atten.psi.w", std::vector<std::int64_t>{h, cond->proj_dim});
        shapes.emplace_back("atten.psi.b", std::vector<std::int64_t>{1, cond->proj_dim});
    }
    shapes.emplace_back("linear1.w", std::vector<std::int64_t>{h, a});
    shapes.emplace_back("linear1.b", std::vector<std::int64_t>{1, a});
    return shapes;
}

ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
    ModelParams params;
    for (const auto& [path, shape] : param_shapes(cfg)) {
        Rng stream = rng.fork(fnv1a(path));
        TensorPtr t;
        if (path == "atten.R") {
            // Random positive start; the paper leaves the distribution open.
            t = Tensor::uniform(shape, 0.5, 1.5, stream, true);
        } else if (path.ends_with(".b")) {
            t = Tensor::zeros(shape, true);
        } else {
            const std::int64_t fan_in = shape.size() >= 2
                                            ? std::accumulate(shape.begin(), shape.end() - 1,
                                                              std::int64_t{1}, std::multiplies<>())
                                            : shape[0];
            t = Tensor::scaled_uniform(shape, fan_in, stream, true);
        }
        params.values.emplace(path, std::move(t));
    }
    return params;
}

std::int64_t param_count(const ModelConfig& cfg) {
    std::int64_t n = 0;
    for (const auto& [_, shape] : param_shapes(cfg)) n += shape_product(shape);
    return n;
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

TensorPtr conv1d_forward(Graph& g, const TensorPtr& features, const TensorPtr& w,
                         const TensorPtr& b, std::int64_t stride) {
    if (features->ndim() != 2 || w->ndim() != 3) throw ShapeError("conv1d: bad input rank");
    const std::int64_t t_in = features->shape[0];
    const std::int64_t f = features->shape[1];
    const std::int64_t c = w->shape[0];
    const std::int64_t k = w->shape[1];
    if (w->shape[2] != f) throw ShapeError("conv1d: kernel feature width mismatch");
    if (t_in < k) {
        throw UtteranceTooShortError("conv1d: " + std::to_string(t_in) + " frames < kernel width " +
                                     std::to_string(k));
    }
    const std::int64_t t_out = (t_in - k) / stride + 1;

    auto out = Tensor::zeros({t_out, c});
    for (std::int64_t t = 0; t < t_out; ++t) {
        const double* xwin = features->data.data() + t * stride * f;
        for (std::int64_t ch = 0; ch < c; ++ch) {
            const double* ker = w->data.data() + ch * k * f;
            double acc = 0.0;
            for (std::int64_t i = 0; i < k * f; ++i) acc += ker[i] * xwin[i];
            out->data[static_cast<std::size_t>(t * c + ch)] = acc;
        }
    }
    auto conv = g.append("conv1d", {features, w}, out, [features, w, out, stride, t_out, c, k, f] {
        if (w->requires_grad) {
            w->ensure_grad();
            for (std::int64_t t = 0; t < t_out; ++t) {
                const double* xwin = features->data.data() + t * stride * f;
                for (std::int64_t ch = 0; ch < c; ++ch) {
                    const double d = out->grad[static_cast<std::size_t>(t * c + ch)];
                    if (d == 0.0) continue;
                    double* gker = w->grad.data() + ch * k * f;
                    for (std::int64_t i = 0; i < k * f; ++i) gker[i] += d * xwin[i];
                }
            }
        }
        if (features->requires_grad) {
            features->ensure_grad();
            for (std::int64_t t = 0; t < t_out; ++t) {
                double* gwin = features->grad.data() + t * stride * f;
                for (std::int64_t ch = 0; ch < c; ++ch) {
                    const double d = out->grad[static_cast<std::size_t>(t * c + ch)];
                    if (d == 0.0) continue;
                    const double* ker = w->data.data() + ch * k * f;
                    for (std::int64_t i = 0; i < k * f; ++i) gwin[i] += d * ker[i];
                }
            }
        }
    });
    return ops::relu_clip(g, ops::add_bias(g, conv, b), 20.0);
}

// ---------------------------------------------------------------------------
// GRU
// ---------------------------------------------------------------------------

TensorPtr gru_forward(Graph& g, const TensorPtr& x, const GruDirParams& p) {
    if (x->ndim() != 2) throw ShapeError("gru: input must be T x d");
    const std::int64_t t_len = x->shape[0];
    const std::int64_t d = x->shape[1];
    const std::int64_t h = p.reset_u->shape[0];
    if (p.reset_w->shape != std::vector<std::int64_t>{d, h}) {
        throw ShapeError("gru: reset weight shape mismatch");
    }

    // Gate caches for backprop-through-time.
    std::vector<double> hs(static_cast<std::size_t>((t_len + 1) * h), 0.0);  // h_0 .. h_T
    std::vector<double> rs(static_cast<std::size_t>(t_len * h));
    std::vector<double> zs(static_cast<std::size_t>(t_len * h));
    std::vector<double> ns(static_cast<std::size_t>(t_len * h));
    std::vector<double> hr(static_cast<std::size_t>(t_len * h));  // r .* h_prev

    auto out = Tensor::zeros({t_len, h});

    const double* wr = p.reset_w->data.data();
    const double* ur = p.reset_u->data.data();
    const double* br = p.reset_b->data.data();
    const double* wz = p.update_w->data.data();
    const double* uz = p.update_u->data.data();
    const double* bz = p.update_b->data.data();
    const double* wn = p.cand_w->data.data();
    const double* un = p.cand_u->data.data();
    const double* bn = p.cand_b->data.data();

    std::vector<double> ar(static_cast<std::size_t>(h)), az(static_cast<std::size_t>(h)),
        an(static_cast<std::size_t>(h));
    for (std::int64_t t = 0; t < t_len; ++t) {
        const double* xt = x->data.data() + t * d;
        const double* hp = hs.data() + t * h;
        for (std::int64_t j = 0; j < h; ++j) {
            ar[static_cast<std::size_t>(j)] = br[j];
            az[static_cast<std::size_t>(j)] = bz[j];
            an[static_cast<std::size_t>(j)] = bn[j];
        }
        for (std::int64_t i = 0; i < d; ++i) {
            const double xv = xt[i];
            if (xv == 0.0) continue;
            const double* wr_row = wr + i * h;
            const double* wz_row = wz + i * h;
            const double* wn_row = wn + i * h;
            for (std::int64_t j = 0; j < h; ++j) {
                ar[static_cast<std::size_t>(j)] += xv * wr_row[j];
                az[static_cast<std::size_t>(j)] += xv * wz_row[j];
                an[static_cast<std::size_t>(j)] += xv * wn_row[j];
            }
        }
        for (std::int64_t i = 0; i < h; ++i) {
            const double hv = hp[i];
            if (hv == 0.0) continue;
            const double* ur_row = ur + i * h;
            const double* uz_row = uz + i * h;
            for (std::int64_t j = 0; j < h; ++j) {
                ar[static_cast<std::size_t>(j)] += hv * ur_row[j];
                az[static_cast<std::size_t>(j)] += hv * uz_row[j];
            }
        }
        double* rt = rs.data() + t * h;
        double* zt = zs.data() + t * h;
        double* hrt = hr.data() + t * h;
        for (std::int64_t j = 0; j < h; ++j) {
            rt[j] = sigmoid_scalar(ar[static_cast<std::size_t>(j)]);
            zt[j] = sigmoid_scalar(az[static_cast<std::size_t>(j)]);
            hrt[j] = rt[j] * hp[j];
        }
        for (std::int64_t i = 0; i < h; ++i) {
            const double hv = hrt[i];
            if (hv == 0.0) continue;
            const double* un_row = un + i * h;
            for (std::int64_t j = 0; j < h; ++j) an[static_cast<std::size_t>(j)] += hv * un_row[j];
        }
        double* nt = ns.data() + t * h;
        double* ht = hs.data() + (t + 1) * h;
        double* ot = out->data.data() + t * h;
        for (std::int64_t j = 0; j < h; ++j) {
            nt[j] = std::tanh(an[static_cast<std::size_t>(j)]);
            ht[j] = (1.0 - zt[j]) * nt[j] + zt[j] * hp[j];
            ot[j] = ht[j];
        }
    }

    GruDirParams prm = p;
    return g.append(
        "gru",
        {x, p.reset_w, p.reset_u, p.reset_b, p.update_w, p.update_u, p.update_b, p.cand_w, p.cand_u,
         p.cand_b},
        out,
        [x, prm, out, t_len, d, h, hs = std::move(hs), rs = std::move(rs), zs = std::move(zs),
         ns = std::move(ns), hr = std::move(hr)] {
            const bool need_dx = x->requires_grad;
            bool need_dp = false;
            for (const TensorPtr& t :
                 {prm.reset_w, prm.reset_u, prm.reset_b, prm.update_w, prm.update_u, prm.update_b,
                  prm.cand_w, prm.cand_u, prm.cand_b}) {
                need_dp = need_dp || t->requires_grad;
            }
            if (!need_dx && !need_dp) return;
            if (need_dp) {
                for (const TensorPtr& t :
                     {prm.reset_w, prm.reset_u, prm.reset_b, prm.update_w, prm.update_u,
                      prm.update_b, prm.cand_w, prm.cand_u, prm.cand_b}) {
                    t->ensure_grad();
                }
            }
            if (need_dx) x->ensure_grad();

            const double* ur = prm.reset_u->data.data();
            const double* uz = prm.update_u->data.data();
            const double* un = prm.cand_u->data.data();
            const double* wr = prm.reset_w->data.data();
            const double* wz = prm.update_w->data.data();
            const double* wn = prm.cand_w->data.data();

            std::vector<double> dh(static_cast<std::size_t>(h), 0.0);
            std::vector<double> dhp(static_cast<std::size_t>(h));
            std::vector<double> dar(static_cast<std::size_t>(h)), daz(static_cast<std::size_t>(h)),
                dan(static_cast<std::size_t>(h)), dhr(static_cast<std::size_t>(h));

            for (std::int64_t t = t_len - 1; t >= 0; --t) {
                const double* hp = hs.data() + t * h;
                const double* rt = rs.data() + t * h;
                const double* zt = zs.data() + t * h;
                const double* nt = ns.data() + t * h;
                const double* hrt = hr.data() + t * h;
                const double* go = out->grad.data() + t * h;
                const double* xt = x->data.data() + t * d;

                // Incoming gradient: direct output grad plus recurrent carry.
                for (std::int64_t j = 0; j < h; ++j) {
                    const double delta = dh[static_cast<std::size_t>(j)] + go[j];
                    const double dn = delta * (1.0 - zt[j]);
                    dan[static_cast<std::size_t>(j)] = dn * (1.0 - nt[j] * nt[j]);
                    const double dz = delta * (hp[j] - nt[j]);
                    daz[static_cast<std::size_t>(j)] = dz * zt[j] * (1.0 - zt[j]);
                    dhp[static_cast<std::size_t>(j)] = delta * zt[j];
                }
                // Candidate path: dhr = dan * Un^T, then reset gate.
                for (std::int64_t i = 0; i < h; ++i) {
                    const double* un_row = un + i * h;
                    double acc = 0.0;
                    for (std::int64_t j = 0; j < h; ++j) acc += dan[static_cast<std::size_t>(j)] * un_row[j];
                    dhr[static_cast<std::size_t>(i)] = acc;
                }
                for (std::int64_t j = 0; j < h; ++j) {
                    const double dr = dhr[static_cast<std::size_t>(j)] * hp[j];
                    dar[static_cast<std::size_t>(j)] = dr * rt[j] * (1.0 - rt[j]);
                    dhp[static_cast<std::size_t>(j)] += dhr[static_cast<std::size_t>(j)] * rt[j];
                }
                // dh_prev contributions through the recurrent weights.
                for (std::int64_t i = 0; i < h; ++i) {
                    const double* ur_row = ur + i * h;
                    const double* uz_row = uz + i * h;
                    double acc = 0.0;
                    for (std::int64_t j = 0; j < h; ++j) {
                        acc += dar[static_cast<std::size_t>(j)] * ur_row[j] +
                               daz[static_cast<std::size_t>(j)] * uz_row[j];
                    }
                    dhp[static_cast<std::size_t>(i)] += acc;
                }
                if (need_dp) {
                    double* gwr = prm.reset_w->grad.data();
                    double* gwz = prm.update_w->grad.data();
                    double* gwn = prm.cand_w->grad.data();
                    for (std::int64_t i = 0; i < d; ++i) {
                        const double xv = xt[i];
                        if (xv == 0.0) continue;
                        double* gwr_row = gwr + i * h;
                        double* gwz_row = gwz + i * h;
                        double* gwn_row = gwn + i * h;
                        for (std::int64_t j = 0; j < h; ++j) {
                            gwr_row[j] += xv * dar[static_cast<std::size_t>(j)];
                            gwz_row[j] += xv * daz[static_cast<std::size_t>(j)];
                            gwn_row[j] += xv * dan[static_cast<std::size_t>(j)];
                        }
                    }
                    double* gur = prm.reset_u->grad.data();
                    double* guz = prm.update_u->grad.data();
                    double* gun = prm.cand_u->grad.data();
                    for (std::int64_t i = 0; i < h; ++i) {
                        const double hv = hp[i];
                        const double hrv = hrt[i];
                        double* gur_row = gur + i * h;
                        double* guz_row = guz + i * h;
                        double* gun_row = gun + i * h;
                        for (std::int64_t j = 0; j < h; ++j) {
                            gur_row[j] += hv * dar[static_cast<std::size_t>(j)];
                            guz_row[j] += hv * daz[static_cast<std::size_t>(j)];
                            gun_row[j] += hrv * dan[static_cast<std::size_t>(j)];
                        }
                    }
                    double* gbr = prm.reset_b->grad.data();
                    double* gbz = prm.update_b->grad.data();
                    double* gbn = prm.cand_b->grad.data();
                    for (std::int64_t j = 0; j < h; ++j) {
                        gbr[j] += dar[static_cast<std::size_t>(j)];
                        gbz[j] += daz[static_cast<std::size_t>(j)];
                        gbn[j] += dan[static_cast<std::size_t>(j)];
                    }
                }
                if (need_dx) {
                    double* gx = x->grad.data() + t * d;
                    for (std::int64_t i = 0; i < d; ++i) {
                        const double* wr_row = wr + i * h;
                        const double* wz_row = wz + i * h;
                        const double* wn_row = wn + i * h;
                        double acc = 0.0;
                        for (std::int64_t j = 0; j < h; ++j) {
                            acc += dar[static_cast<std::size_t>(j)] * wr_row[j] +
                                   daz[static_cast<std::size_t>(j)] * wz_row[j] +
                                   dan[static_cast<std::size_t>(j)] * wn_row[j];
                        }
                        gx[i] += acc;
                    }
                }
                dh.swap(dhp);
            }
        });
}

TensorPtr bigru_forward(Graph& g, const TensorPtr& x, const GruDirParams& fwd,
                        const GruDirParams& bwd) {
    auto left = gru_forward(g, x, fwd);
    auto right = ops::reverse_rows(g, gru_forward(g, ops::reverse_rows(g, x), bwd));
    return ops::add(g, left, right);
}

// ---------------------------------------------------------------------------
// Attention variants
// ---------------------------------------------------------------------------

TensorPtr build_tally_matrix(const std::array<int, 3>& columns) {
    const int r = columns[0] + columns[1] + columns[2];
    if (r < 1) throw ConfigError("tally matrix needs at least one row");
    auto m = Tensor::zeros({r, 3});
    int rowi = 0;
    for (int n = 0; n < 3; ++n) {
        for (int k = 0; k < columns[static_cast<std::size_t>(n)]; ++k) {
            m->at(rowi, n) = 1.0;
            ++rowi;
        }
    }
    return m;
}

TensorPtr manual_attention(Graph& g, const ManualAttention& spec, const TensorPtr& v1,
                           const TensorPtr& v2, const TensorPtr& v3) {
    validate_attention(AttentionSpec{spec});
    if (v1->shape != v2->shape || v1->shape != v3->shape) {
        throw ShapeError("manual_attention: layer outputs must share a shape");
    }
    const std::array<TensorPtr, 3> v{v1, v2, v3};
    TensorPtr out;
    for (int n = 0; n < 3; ++n) {
        if (spec.sixths[static_cast<std::size_t>(n)] == 0) continue;
        auto term = ops::scale(g, v[static_cast<std::size_t>(n)],
                               spec.sixths[static_cast<std::size_t>(n)] / 6.0);
        out = out ? ops::add(g, out, term) : term;
    }
    return out;
}

LamResult learnable_attention(Graph& g, const TensorPtr& r_matrix,
                              const std::array<int, 3>& columns, const TensorPtr& v1,
                              const TensorPtr& v2, const TensorPtr& v3) {
    const std::int64_t r = columns[0] + columns[1] + columns[2];
    if (r_matrix->shape != std::vector<std::int64_t>{1, r}) {
        throw ShapeError("learnable_attention: R must be 1 x (r1+r2+r3)");
    }
    for (double v : r_matrix->data) {
        if (v < 0.0) throw ContractError("learnable_attention: R has a negative entry");
    }
    if (v1->shape != v2->shape || v1->shape != v3->shape) {
        throw ShapeError("learnable_attention: layer outputs must share a shape");
    }

    auto tally = build_tally_matrix(columns);
    auto score = ops::matmul(g, r_matrix, tally);  // 1 x 3 partition sums
    std::vector<bool> mask(3);
    for (int n = 0; n < 3; ++n) mask[static_cast<std::size_t>(n)] = columns[static_cast<std::size_t>(n)] > 0;
    auto alphas = ops::masked_softmax(g, score, mask);

    const std::array<TensorPtr, 3> v{v1, v2, v3};
    TensorPtr out;
    for (int n = 0; n < 3; ++n) {
        if (!mask[static_cast<std::size_t>(n)]) continue;  // exactly zero attention
        auto term = ops::scale_by(g, v[static_cast<std::size_t>(n)], ops::element(g, alphas, n));
        out = out ? ops::add(g, out, term) : term;
    }
    return LamResult{alphas, out};
}

TensorPtr conditional_attention(Graph& g, const TensorPtr& query,
                                const std::array<TensorPtr, 3>& values, const TensorPtr& phi_w,
                                const TensorPtr& phi_b, const TensorPtr& psi_w,
                                const TensorPtr& psi_b) {
    auto proj_q = ops::add_bias(g, ops::matmul(g, query, phi_w), phi_b);
    std::vector<TensorPtr> score_cols;
    score_cols.reserve(3);
    for (const auto& v : values) {
        auto proj_k = ops::add_bias(g, ops::matmul(g, v, psi_w), psi_b);
        score_cols.push_back(ops::rowwise_dot(g, proj_q, proj_k));
    }
    auto alphas = ops::softmax(g, ops::concat_cols(g, score_cols));  // T x 3, rows sum to 1
    TensorPtr out;
    for (int n = 0; n < 3; ++n) {
        auto term = ops::scale_rows(g, values[static_cast<std::size_t>(n)], ops::col(g, alphas, n));
        out = out ? ops::add(g, out, term) : term;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full model
// ---------------------------------------------------------------------------

ForwardResult model_forward(Graph& g, const TensorPtr& features, const ModelConfig& cfg,
                            const ModelParams& params) {
    cfg.validate();
    if (features->ndim() != 2 || features->shape[1] != cfg.feature_dim) {
        throw ShapeError("model_forward: features must be T x feature_dim");
    }

    auto gru_params = [&](int n, const char* dir) {
        const std::string base = "gru" + std::to_string(n) + "." + dir + ".";
        return GruDirParams{params.at(base + "reset.w"),     params.at(base + "reset.u"),
                            params.at(base + "reset.b"),     params.at(base + "update.w"),
                            params.at(base + "update.u"),    params.at(base + "update.b"),
                            params.at(base + "candidate.w"), params.at(base + "candidate.u"),
                            params.at(base + "candidate.b")};
    };

    auto x = conv1d_forward(g, features, params.at("conv.w"), params.at("conv.b"), cfg.conv.stride);
    auto g1 = bigru_forward(g, x, gru_params(1, "fwd"), gru_params(1, "bwd"));
    auto g2 = bigru_forward(g, g1, gru_params(2, "fwd"), gru_params(2, "bwd"));
    auto g3 = bigru_forward(g, g2, gru_params(3, "fwd"), gru_params(3, "bwd"));

    // AttenL input order: index 1 is the output-adjacent layer, so one-hot
    // weights (1,0,0) reproduce the plain conv->gru->linear stack.
    const TensorPtr v1 = g3, v2 = g2, v3 = g1;

    ForwardResult result;
    TensorPtr fused;
    if (std::holds_alternative<IdentityAttention>(cfg.attention)) {
        fused = v1;
    } else if (const auto* m = std::get_if<ManualAttention>(&cfg.attention)) {
        fused = manual_attention(g, *m, v1, v2, v3);
    } else if (const auto* l = std::get_if<LearnableAttention>(&cfg.attention)) {
        auto lam = learnable_attention(g, params.at("atten.R"), l->columns, v1, v2, v3);
        fused = lam.out;
        result.alphas = lam.alphas;
    } else {
        fused = conditional_attention(g, g3, {v1, v2, v3}, params.at("atten.phi.w"),
                                      params.at("atten.phi.b"), params.at("atten.psi.w"),
                                      params.at("atten.psi.b"));
    }

    auto logits = ops::add_bias(g, ops::matmul(g, fused, params.at("linear1.w")),
                                params.at("linear1.b"));
    result.log_probs = ops::log_softmax(g, logits);
    return result;
}

}  // namespace asr
