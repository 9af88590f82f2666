#include "contextox/nn/transformer.hpp"

#include <cmath>

namespace contextox::nn {

AttentionParams AttentionParams::create(ParameterSet& set, const std::string& prefix,
                                        int model_dim, Rng& rng, double init_std) {
    AttentionParams p;
    p.wq = &set.create_normal(prefix + ".wq", model_dim, model_dim, rng, init_std);
    p.wk = &set.create_normal(prefix + ".wk", model_dim, model_dim, rng, init_std);
    p.wv = &set.create_normal(prefix + ".wv", model_dim, model_dim, rng, init_std);
    p.wo = &set.create_normal(prefix + ".wo", model_dim, model_dim, rng, init_std);
    p.bq = &set.create(prefix + ".bq", 1, model_dim);
    p.bk = &set.create(prefix + ".bk", 1, model_dim);
    p.bv = &set.create(prefix + ".bv", 1, model_dim);
    p.bo = &set.create(prefix + ".bo", 1, model_dim);
    return p;
}

EncoderBlockParams EncoderBlockParams::create(ParameterSet& set, const std::string& prefix,
                                              int model_dim, int ffn_dim, Rng& rng,
                                              double init_std) {
    EncoderBlockParams p;
    p.attn = AttentionParams::create(set, prefix + ".attn", model_dim, rng, init_std);
    p.ffn_w1 = &set.create_normal(prefix + ".ffn.w1", model_dim, ffn_dim, rng, init_std);
    p.ffn_b1 = &set.create(prefix + ".ffn.b1", 1, ffn_dim);
    p.ffn_w2 = &set.create_normal(prefix + ".ffn.w2", ffn_dim, model_dim, rng, init_std);
    p.ffn_b2 = &set.create(prefix + ".ffn.b2", 1, model_dim);
    p.ln1_g = &set.create_constant(prefix + ".ln1.g", 1, model_dim, 1.0);
    p.ln1_b = &set.create(prefix + ".ln1.b", 1, model_dim);
    p.ln2_g = &set.create_constant(prefix + ".ln2.g", 1, model_dim, 1.0);
    p.ln2_b = &set.create(prefix + ".ln2.b", 1, model_dim);
    return p;
}

DecoderBlockParams DecoderBlockParams::create(ParameterSet& set, const std::string& prefix,
                                              int model_dim, int ffn_dim, Rng& rng,
                                              double init_std) {
    DecoderBlockParams p;
    p.self_attn = AttentionParams::create(set, prefix + ".self", model_dim, rng, init_std);
    p.cross_attn = AttentionParams::create(set, prefix + ".cross", model_dim, rng, init_std);
    p.ffn_w1 = &set.create_normal(prefix + ".ffn.w1", model_dim, ffn_dim, rng, init_std);
    p.ffn_b1 = &set.create(prefix + ".ffn.b1", 1, ffn_dim);
    p.ffn_w2 = &set.create_normal(prefix + ".ffn.w2", ffn_dim, model_dim, rng, init_std);
    p.ffn_b2 = &set.create(prefix + ".ffn.b2", 1, model_dim);
    p.ln1_g = &set.create_constant(prefix + ".ln1.g", 1, model_dim, 1.0);
    p.ln1_b = &set.create(prefix + ".ln1.b", 1, model_dim);
    p.ln2_g = &set.create_constant(prefix + ".ln2.g", 1, model_dim, 1.0);
    p.ln2_b = &set.create(prefix + ".ln2.b", 1, model_dim);
    p.ln3_g = &set.create_constant(prefix + ".ln3.g", 1, model_dim, 1.0);
    p.ln3_b = &set.create(prefix + ".ln3.b", 1, model_dim);
    return p;
}

Var attention(Graph& g, Var queries, Var keys_values, const AttentionParams& p,
              const Matrix* additive_mask) {
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(g.value(queries).cols()));
    Var q = g.add_rowwise(g.matmul(queries, g.param(*p.wq)), g.param(*p.bq));
    Var k = g.add_rowwise(g.matmul(keys_values, g.param(*p.wk)), g.param(*p.bk));
    Var v = g.add_rowwise(g.matmul(keys_values, g.param(*p.wv)), g.param(*p.bv));
    Var scores = g.scale(g.matmul(q, g.transpose(k)), inv_sqrt_d);
    if (additive_mask != nullptr) scores = g.add(scores, g.input(*additive_mask));
    Var probs = g.softmax_rows(scores);
    Var ctx = g.matmul(probs, v);
    return g.add_rowwise(g.matmul(ctx, g.param(*p.wo)), g.param(*p.bo));
}

namespace {

Var feed_forward(Graph& g, Var x, Parameter& w1, Parameter& b1, Parameter& w2, Parameter& b2) {
    Var h = g.relu(g.add_rowwise(g.matmul(x, g.param(w1)), g.param(b1)));
    return g.add_rowwise(g.matmul(h, g.param(w2)), g.param(b2));
}

} // namespace

Var encoder_block(Graph& g, Var x, const EncoderBlockParams& p, const Matrix* additive_mask) {
    Var a = attention(g, x, x, p.attn, additive_mask);
    x = g.layer_norm_rows(g.add(x, a), g.param(*p.ln1_g), g.param(*p.ln1_b));
    Var f = feed_forward(g, x, *p.ffn_w1, *p.ffn_b1, *p.ffn_w2, *p.ffn_b2);
    return g.layer_norm_rows(g.add(x, f), g.param(*p.ln2_g), g.param(*p.ln2_b));
}

Var decoder_block(Graph& g, Var x, Var memory, const DecoderBlockParams& p,
                  const Matrix& causal) {
    Var a = attention(g, x, x, p.self_attn, &causal);
    x = g.layer_norm_rows(g.add(x, a), g.param(*p.ln1_g), g.param(*p.ln1_b));
    Var c = attention(g, x, memory, p.cross_attn, nullptr);
    x = g.layer_norm_rows(g.add(x, c), g.param(*p.ln2_g), g.param(*p.ln2_b));
    Var f = feed_forward(g, x, *p.ffn_w1, *p.ffn_b1, *p.ffn_w2, *p.ffn_b2);
    return g.layer_norm_rows(g.add(x, f), g.param(*p.ln3_g), g.param(*p.ln3_b));
}

Matrix causal_mask(int rows) {
    Matrix m = Matrix::Zero(rows, rows);
    for (int r = 0; r < rows; ++r) {
        for (int c = r + 1; c < rows; ++c) m(r, c) = -1e30;
    }
    return m;
}

} // namespace contextox::nn
