#pragma once

#include <string>

#include "contextox/nn/graph.hpp"

namespace contextox::nn {

/// Single-head scaled dot-product attention weights.
struct AttentionParams {
    Parameter* wq = nullptr;
    Parameter* wk = nullptr;
    Parameter* wv = nullptr;
    Parameter* wo = nullptr;
    Parameter* bq = nullptr;
    Parameter* bk = nullptr;
    Parameter* bv = nullptr;
    Parameter* bo = nullptr;

    static AttentionParams create(ParameterSet& set, const std::string& prefix, int model_dim,
                                  Rng& rng, double init_std);
};

/// Post-norm transformer encoder block: self-attention + feed-forward, each
/// with a residual connection and layer normalization.
struct EncoderBlockParams {
    AttentionParams attn;
    Parameter* ffn_w1 = nullptr;
    Parameter* ffn_b1 = nullptr;
    Parameter* ffn_w2 = nullptr;
    Parameter* ffn_b2 = nullptr;
    Parameter* ln1_g = nullptr;
    Parameter* ln1_b = nullptr;
    Parameter* ln2_g = nullptr;
    Parameter* ln2_b = nullptr;

    static EncoderBlockParams create(ParameterSet& set, const std::string& prefix, int model_dim,
                                     int ffn_dim, Rng& rng, double init_std);
};

/// Decoder block: causal self-attention, cross-attention over a memory, and
/// feed-forward; three residual + layer-norm stages.
struct DecoderBlockParams {
    AttentionParams self_attn;
    AttentionParams cross_attn;
    Parameter* ffn_w1 = nullptr;
    Parameter* ffn_b1 = nullptr;
    Parameter* ffn_w2 = nullptr;
    Parameter* ffn_b2 = nullptr;
    Parameter* ln1_g = nullptr;
    Parameter* ln1_b = nullptr;
    Parameter* ln2_g = nullptr;
    Parameter* ln2_b = nullptr;
    Parameter* ln3_g = nullptr;
    Parameter* ln3_b = nullptr;

    static DecoderBlockParams create(ParameterSet& set, const std::string& prefix, int model_dim,
                                     int ffn_dim, Rng& rng, double init_std);
};

/// queries attends over keys_values. mask, when present, is an additive
/// score matrix (rows = queries, cols = keys): 0 keeps, large negative hides.
Var attention(Graph& g, Var queries, Var keys_values, const AttentionParams& p,
              const Matrix* additive_mask = nullptr);

Var encoder_block(Graph& g, Var x, const EncoderBlockParams& p,
                  const Matrix* additive_mask = nullptr);

Var decoder_block(Graph& g, Var x, Var memory, const DecoderBlockParams& p,
                  const Matrix& causal_mask);

/// T x T upper-triangular additive mask hiding future positions.
Matrix causal_mask(int rows);

} // namespace contextox::nn
