#include "contextox/nn/optimizer.hpp"

#include <cmath>

namespace contextox::nn {

AdamW::AdamW(std::vector<Parameter*> params, AdamWConfig config)
    : params_(std::move(params)), config_(config) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Parameter* p : params_) {
        m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
}

void AdamW::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * p.grad.cwiseProduct(p.grad);
        const Matrix mhat = m_[i] / bc1;
        const Matrix vhat = v_[i] / bc2;
        p.value -= config_.learning_rate *
                   mhat.cwiseQuotient((vhat.cwiseSqrt().array() + config_.eps).matrix());
        if (config_.weight_decay != 0.0) {
            p.value -= config_.learning_rate * config_.weight_decay * p.value;
        }
        p.zero_grad();
    }
}

} // namespace contextox::nn
