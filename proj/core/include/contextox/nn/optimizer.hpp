#pragma once

#include <vector>

#include "contextox/nn/graph.hpp"

namespace contextox::nn {

/// Adam with decoupled weight decay. weight_decay = 0 gives plain Adam.
struct AdamWConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
};

class AdamW {
public:
    AdamW(std::vector<Parameter*> params, AdamWConfig config);

    /// One update from the currently accumulated gradients; zeroes them.
    void step();

    const AdamWConfig& config() const { return config_; }

private:
    std::vector<Parameter*> params_;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
    AdamWConfig config_;
    long t_ = 0;
};

} // namespace contextox::nn
