#include "contextox/causal_lm.hpp"

#include <cmath>

#include "contextox/errors.hpp"

namespace contextox::augmentation {

ToyCausalLM::ToyCausalLM(Vocabulary vocab, ToyLmConfig config)
    : vocab_(std::move(vocab)), config_(config) {
    Rng rng(config_.seed);
    const int d = config_.hidden_dim;
    tok_emb_ = &params_.create_normal("lm.tok_emb", vocab_.size(), d, rng, config_.init_std);
    pos_emb_ = &params_.create_normal("lm.pos_emb", config_.max_positions, d, rng,
                                      config_.init_std);
    for (int l = 0; l < config_.layers; ++l) {
        blocks_.push_back(nn::EncoderBlockParams::create(
            params_, "lm.block" + std::to_string(l), d, config_.ffn_dim, rng, config_.init_std));
    }
    w_out_ = &params_.create_normal("lm.out.w", d, vocab_.size(), rng, config_.init_std);
    b_out_ = &params_.create("lm.out.b", 1, vocab_.size());
}

std::unique_ptr<ToyCausalLM> ToyCausalLM::clone() const {
    auto copy = std::make_unique<ToyCausalLM>(vocab_, config_);
    copy->params_.restore_values(params_.snapshot_values());
    return copy;
}

std::string ToyCausalLM::identifier() const {
    return "toy-lm-d" + std::to_string(config_.hidden_dim) + "-l" + std::to_string(config_.layers);
}

nn::Var ToyCausalLM::logits_var(nn::Graph& g, const std::vector<int>& prefix) const {
    if (prefix.empty()) throw IntegrityError("causal LM prefix must be non-empty");
    std::vector<int> ids = prefix;
    if (static_cast<int>(ids.size()) > config_.max_positions) {
        // Keep the most recent window.
        ids.assign(prefix.end() - config_.max_positions, prefix.end());
    }
    const int n = static_cast<int>(ids.size());
    std::vector<int> positions(ids.size());
    for (int i = 0; i < n; ++i) positions[static_cast<std::size_t>(i)] = i;
    nn::Var x = g.add(g.gather_rows(g.param(*tok_emb_), ids),
                      g.gather_rows(g.param(*pos_emb_), positions));
    const nn::Matrix mask = nn::causal_mask(n);
    for (const auto& block : blocks_) x = nn::encoder_block(g, x, block, &mask);
    return g.add_rowwise(g.matmul(x, g.param(*w_out_)), g.param(*b_out_));
}

Eigen::RowVectorXd ToyCausalLM::next_logits(const std::vector<int>& prefix) const {
    nn::Graph g;
    const nn::Matrix& logits = g.value(logits_var(g, prefix));
    return logits.row(logits.rows() - 1);
}

nn::Var ToyCausalLM::sequence_nll_var(nn::Graph& g, const std::vector<int>& tokens) const {
    std::vector<int> seq;
    seq.reserve(tokens.size() + 2);
    seq.push_back(Vocabulary::kBos);
    seq.insert(seq.end(), tokens.begin(), tokens.end());
    seq.push_back(Vocabulary::kEos);
    if (static_cast<int>(seq.size()) > config_.max_positions) {
        seq.resize(static_cast<std::size_t>(config_.max_positions));
    }
    std::vector<int> inputs(seq.begin(), seq.end() - 1);
    std::vector<int> targets(seq.begin() + 1, seq.end());
    return g.cross_entropy_rows(logits_var(g, inputs), targets);
}

double ToyCausalLM::perplexity(const std::vector<std::string>& texts) const {
    if (texts.empty()) throw ConfigError("perplexity requires at least one text");
    double total_nll = 0.0;
    long total_tokens = 0;
    for (const std::string& text : texts) {
        const std::vector<int> ids = vocab_.encode(text);
        nn::Graph g;
        total_nll += g.value(sequence_nll_var(g, ids))(0, 0);
        total_tokens += static_cast<long>(ids.size()) + 1; // + EOS
    }
    return std::exp(total_nll / static_cast<double>(total_tokens));
}

Vocabulary build_lm_vocab(const std::vector<std::string>& texts, std::size_t max_size) {
    std::vector<std::string> with_sep = texts;
    with_sep.push_back(kGenerationSeparator);
    return Vocabulary::build(with_sep, max_size);
}

} // namespace contextox::augmentation
