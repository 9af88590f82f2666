#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "contextox/nn/graph.hpp"
#include "contextox/nn/transformer.hpp"
#include "contextox/vocab.hpp"

namespace contextox::augmentation {

/// Left-to-right language model: next-token logits over a vocabulary.
class CausalLanguageModel {
public:
    virtual ~CausalLanguageModel() = default;

    virtual const Vocabulary& vocab() const = 0;
    virtual int max_context() const = 0;
    virtual std::string identifier() const = 0;

    /// Logits for the token following the prefix. The prefix includes BOS.
    virtual Eigen::RowVectorXd next_logits(const std::vector<int>& prefix) const = 0;

    int end_token_id() const { return Vocabulary::kEos; }
};

struct ToyLmConfig {
    int hidden_dim = 32;
    int layers = 2;
    int ffn_dim = 64;
    int max_positions = 256;
    std::uint64_t seed = 0;
    double init_std = 0.08;
};

/// Word-level decoder-only transformer, small enough to fine-tune on a CPU.
class ToyCausalLM : public CausalLanguageModel {
public:
    ToyCausalLM(Vocabulary vocab, ToyLmConfig config);

    ToyCausalLM(const ToyCausalLM&) = delete;
    ToyCausalLM& operator=(const ToyCausalLM&) = delete;

    /// Deep copy (same config and weights).
    std::unique_ptr<ToyCausalLM> clone() const;

    const Vocabulary& vocab() const override { return vocab_; }
    int max_context() const override { return config_.max_positions; }
    std::string identifier() const override;
    Eigen::RowVectorXd next_logits(const std::vector<int>& prefix) const override;

    /// Per-position logits (T x V) for a full prefix, on the tape.
    nn::Var logits_var(nn::Graph& g, const std::vector<int>& prefix) const;

    /// Summed NLL of text tokens framed as [BOS] tokens [EOS].
    nn::Var sequence_nll_var(nn::Graph& g, const std::vector<int>& tokens) const;

    /// exp(mean per-token NLL) over the given texts.
    double perplexity(const std::vector<std::string>& texts) const;

    nn::ParameterSet& parameters() const { return params_; }
    const ToyLmConfig& config() const { return config_; }

private:
    Vocabulary vocab_;
    ToyLmConfig config_;
    mutable nn::ParameterSet params_;
    nn::Parameter* tok_emb_ = nullptr;
    nn::Parameter* pos_emb_ = nullptr;
    std::vector<nn::EncoderBlockParams> blocks_;
    nn::Parameter* w_out_ = nullptr;
    nn::Parameter* b_out_ = nullptr;
};

/// Reserved separator line between the prompt and the generation slot.
inline constexpr const char* kGenerationSeparator = "<|gen|>";

/// Vocabulary for an LM: corpus words plus the generation separator.
Vocabulary build_lm_vocab(const std::vector<std::string>& texts, std::size_t max_size = 0);

} // namespace contextox::augmentation
