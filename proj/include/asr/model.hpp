#pragma once

#include <array>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "asr/alphabet.hpp"
#include "asr/graph.hpp"
#include "asr/ops.hpp"
#include "asr/rng.hpp"

namespace asr {

// ---------------------------------------------------------------------------
// Attention layer configuration.
//
// Attention index 1 refers to the GRU layer adjacent to the output linear
// layer (gru3 in the parameter naming); index 3 is the GRU right after the
// convolution. With that ordering, weights (1,0,0) reproduce the unmodified
// stack exactly, which is what makes a zero-epoch Manual(6/6,0,0) model
// interchangeable with the base model.
// ---------------------------------------------------------------------------

struct IdentityAttention {};

/// Fixed fusion weights in units of 1/6; numerators must sum to 6.
struct ManualAttention {
    std::array<int, 3> sixths{6, 0, 0};
};

/// Learnable fusion: columns are the partition sizes of the representative
/// matrix R; a zero column pins that layer's weight to exactly 0.
struct LearnableAttention {
    std::array<int, 3> columns{1, 1, 1};
};

/// Content-dependent reference variant; phi/psi project to proj_dim.
struct ConditionalAttention {
    std::int64_t proj_dim = 8;
};

using AttentionSpec =
    std::variant<IdentityAttention, ManualAttention, LearnableAttention, ConditionalAttention>;

/// Validates the variant's invariants; throws ConfigError.
void validate_attention(const AttentionSpec& spec);

/// Short display label: "identity", "M-4/6-2/6-0/6", "L-4-1-1", "cond-8".
std::string attention_label(const AttentionSpec& spec);

struct ConvSpec {
    std::int64_t kernel_width = 5;
    std::int64_t stride = 2;
    std::int64_t out_channels = 0;  // 0 -> gru_hidden
};

struct ModelConfig {
    std::int64_t feature_dim = 16;
    ConvSpec conv;
    std::int64_t gru_hidden = 16;
    int num_gru = 3;  // the attention settings are arity-3; fixed
    std::string symbols = kDefaultSymbols;  // non-blank; CTC blank is index 0
    AttentionSpec attention = IdentityAttention{};

    std::int64_t alphabet_size() const { return static_cast<std::int64_t>(symbols.size()) + 1; }
    std::int64_t conv_channels() const {
        return conv.out_channels > 0 ? conv.out_channels : gru_hidden;
    }
    void validate() const;
};

/// Named trainable tensors. Paths are stable and consumed by checkpoints and
/// freeze masks: conv.{w,b}, gru{1,2,3}.{fwd,bwd}.{reset,update,candidate}.{w,u,b},
/// atten.R, atten.{phi,psi}.{w,b}, linear1.{w,b}.
struct ModelParams {
    std::map<std::string, TensorPtr> values;

    const TensorPtr& at(const std::string& path) const;
    bool has(const std::string& path) const { return values.count(path) > 0; }
    std::int64_t scalar_count() const;
};

/// Parameter paths and shapes induced by a config, in a fixed order.
std::vector<std::pair<std::string, std::vector<std::int64_t>>> param_shapes(const ModelConfig& cfg);

/// Fresh parameter set; each tensor drawn from a stream forked off `rng` by
/// its path, so values do not depend on enumeration order.
ModelParams init_params(const ModelConfig& cfg, Rng& rng);

/// Exact trainable scalar count for the config.
std::int64_t param_count(const ModelConfig& cfg);

// ---------------------------------------------------------------------------
// Layers. Each returns a tape-recorded tensor.
// ---------------------------------------------------------------------------

/// Temporal convolution with bias and relu_clip(20).
/// features: T x F, w: C x K x F, b: 1 x C; output floor((T-K)/stride)+1 x C.
TensorPtr conv1d_forward(Graph& g, const TensorPtr& features, const TensorPtr& w,
                         const TensorPtr& b, std::int64_t stride);

struct GruDirParams {
    TensorPtr reset_w, reset_u, reset_b;
    TensorPtr update_w, update_u, update_b;
    TensorPtr cand_w, cand_u, cand_b;
};

/// Single-direction GRU over rows of x (left to right), zero initial state.
TensorPtr gru_forward(Graph& g, const TensorPtr& x, const GruDirParams& p);

/// Bidirectional GRU; direction outputs are summed per frame.
TensorPtr bigru_forward(Graph& g, const TensorPtr& x, const GruDirParams& fwd,
                        const GruDirParams& bwd);

/// Fixed binary tally matrix for the given partition sizes (r x 3).
TensorPtr build_tally_matrix(const std::array<int, 3>& columns);

/// O = a1*V1 + a2*V2 + a3*V3 for fixed weights.
TensorPtr manual_attention(Graph& g, const ManualAttention& spec, const TensorPtr& v1,
                           const TensorPtr& v2, const TensorPtr& v3);

struct LamResult {
    TensorPtr alphas;  // 1 x 3, constant over frames and utterances
    TensorPtr out;     // T x h
};

/// score_n = sum of R's partition n, alpha = softmax over non-empty
/// partitions, O as in manual attention. R must be non-negative.
LamResult learnable_attention(Graph& g, const TensorPtr& r_matrix,
                              const std::array<int, 3>& columns, const TensorPtr& v1,
                              const TensorPtr& v2, const TensorPtr& v3);

/// Per-frame scores <phi(q_t), psi(v_{n,t})> over the three layer outputs.
TensorPtr conditional_attention(Graph& g, const TensorPtr& query,
                                const std::array<TensorPtr, 3>& values, const TensorPtr& phi_w,
                                const TensorPtr& phi_b, const TensorPtr& psi_w,
                                const TensorPtr& psi_b);

struct ForwardResult {
    TensorPtr log_probs;  // T' x alphabet_size, rows exp-sum to 1
    TensorPtr alphas;     // LAM: 1x3; conditional: T'x3; otherwise null
};

/// conv -> gru1 -> gru2 -> gru3 -> AttenL -> linear1 -> log_softmax.
ForwardResult model_forward(Graph& g, const TensorPtr& features, const ModelConfig& cfg,
                            const ModelParams& params);

}  // namespace asr
