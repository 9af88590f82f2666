#include "contextox/nn/gru.hpp"

namespace contextox::nn {

GruParams GruParams::create(ParameterSet& set, const std::string& prefix, int input_dim,
                            int hidden_dim, Rng& rng, double init_std) {
    GruParams p;
    p.wz = &set.create_normal(prefix + ".wz", input_dim, hidden_dim, rng, init_std);
    p.uz = &set.create_normal(prefix + ".uz", hidden_dim, hidden_dim, rng, init_std);
    p.bz = &set.create(prefix + ".bz", 1, hidden_dim);
    p.wr = &set.create_normal(prefix + ".wr", input_dim, hidden_dim, rng, init_std);
    p.ur = &set.create_normal(prefix + ".ur", hidden_dim, hidden_dim, rng, init_std);
    p.br = &set.create(prefix + ".br", 1, hidden_dim);
    p.wc = &set.create_normal(prefix + ".wc", input_dim, hidden_dim, rng, init_std);
    p.uc = &set.create_normal(prefix + ".uc", hidden_dim, hidden_dim, rng, init_std);
    p.bc = &set.create(prefix + ".bc", 1, hidden_dim);
    return p;
}

Var gru_step(Graph& g, Var x, Var h, const GruParams& p) {
    Var z = g.sigmoid(g.add_rowwise(g.add(g.matmul(x, g.param(*p.wz)), g.matmul(h, g.param(*p.uz))),
                                    g.param(*p.bz)));
    Var r = g.sigmoid(g.add_rowwise(g.add(g.matmul(x, g.param(*p.wr)), g.matmul(h, g.param(*p.ur))),
                                    g.param(*p.br)));
    Var c = g.tanh(g.add_rowwise(
        g.add(g.matmul(x, g.param(*p.wc)), g.matmul(g.cmul(r, h), g.param(*p.uc))),
        g.param(*p.bc)));
    // h' = (1-z).h + z.c
    return g.add(g.cmul(g.affine(z, -1.0, 1.0), h), g.cmul(z, c));
}

Var gru_last_state(Graph& g, const std::vector<Var>& inputs, const GruParams& p, int hidden_dim) {
    Var h = g.zeros(1, hidden_dim);
    for (Var x : inputs) h = gru_step(g, x, h, p);
    return h;
}

} // namespace contextox::nn
