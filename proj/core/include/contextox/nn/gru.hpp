#pragma once

#include <string>
#include <vector>

#include "contextox/nn/graph.hpp"

namespace contextox::nn {

/// Gated recurrent unit:
///   z_t = sigmoid(x W_z + h U_z + b_z)
///   r_t = sigmoid(x W_r + h U_r + b_r)
///   c_t = tanh(x W_c + (r_t . h) U_c + b_c)
///   h_t = (1 - z_t) . h_{t-1} + z_t . c_t
struct GruParams {
    Parameter* wz = nullptr;
    Parameter* uz = nullptr;
    Parameter* bz = nullptr;
    Parameter* wr = nullptr;
    Parameter* ur = nullptr;
    Parameter* br = nullptr;
    Parameter* wc = nullptr;
    Parameter* uc = nullptr;
    Parameter* bc = nullptr;

    static GruParams create(ParameterSet& set, const std::string& prefix, int input_dim,
                            int hidden_dim, Rng& rng, double init_std);
};

/// One step; x is 1 x input_dim, h is 1 x hidden_dim.
Var gru_step(Graph& g, Var x, Var h, const GruParams& p);

/// Runs the cell over inputs in order from an all-zeros initial state and
/// returns the final hidden state. Empty input returns the initial state.
Var gru_last_state(Graph& g, const std::vector<Var>& inputs, const GruParams& p, int hidden_dim);

} // namespace contextox::nn
