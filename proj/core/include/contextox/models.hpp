#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "contextox/corpus.hpp"
#include "contextox/nn/graph.hpp"
#include "contextox/nn/gru.hpp"
#include "contextox/nn/transformer.hpp"
#include "contextox/vocab.hpp"

namespace contextox::models {

/// The six classifier architectures: three target/early-fusion baselines and
/// three context-aware late-fusion models.
enum class Arch {
    TARGET_ONLY,
    TEXT_CONCAT,
    NEXT_SENT_PRED,
    CONTEXT_SINGLE,
    CONTEXT_SUM,
    CONTEXT_RNN,
};

std::string to_string(Arch a);
Arch arch_from_string(const std::string& s);

enum class EncoderKind { PRETRAINED_BIDIRECTIONAL, TOY };

std::string to_string(EncoderKind k);
EncoderKind encoder_kind_from_string(const std::string& s);

struct EncoderSpec {
    EncoderKind kind = EncoderKind::TOY;
    int hidden_dim = 32; // 768 for the pretrained kind
    int max_positions = 512;
    bool supports_segment_pairs = true;
    std::string checkpoint; // published checkpoint id, pretrained kind only
    int ffn_dim = 0;        // 0 -> 4 * hidden_dim (toy encoder)

    static EncoderSpec toy(int hidden_dim = 32);
    static EncoderSpec pretrained(std::string checkpoint = "bert-base-uncased");
    void validate() const;
};

struct ModelSpec {
    Arch arch = Arch::TARGET_ONLY;
    EncoderSpec encoder;
    int rnn_hidden = 0;      // 0 -> encoder hidden_dim; must equal it for CONTEXT_RNN
    double threshold = 0.5;

    bool uses_context_fusion() const {
        return arch == Arch::CONTEXT_SINGLE || arch == Arch::CONTEXT_SUM ||
               arch == Arch::CONTEXT_RNN;
    }
    /// d for the baselines, 2d for the fused [H; U_n] architectures.
    int classifier_in_dim() const {
        return uses_context_fusion() ? 2 * encoder.hidden_dim : encoder.hidden_dim;
    }
    void validate() const;
};

using UtteranceEmbedding = Eigen::RowVectorXd;
using HistoryRepresentation = Eigen::RowVectorXd;

/// Pluggable sentence encoder producing summary-token (CLS) embeddings.
class SentenceEncoder {
public:
    virtual ~SentenceEncoder() = default;

    virtual int hidden_dim() const = 0;
    virtual int max_positions() const = 0;
    virtual bool supports_segment_pairs() const = 0;
    virtual std::string identifier() const = 0;
    virtual const Vocabulary& vocab() const = 0;
    virtual nn::ParameterSet& parameters() const = 0;

    /// CLS embedding (1 x d) of [CLS] tokens [SEP]. Empty input encodes the
    /// frame alone.
    virtual nn::Var encode_cls(nn::Graph& g, const std::vector<int>& tokens) const = 0;

    /// CLS embedding of the segment-pair framing [CLS] A [SEP] B [SEP] with
    /// segment ids 0/1. Segment A is trimmed from the front when over
    /// budget so the most recent context survives.
    virtual nn::Var encode_cls_pair(nn::Graph& g, const std::vector<int>& segment_a,
                                    const std::vector<int>& segment_b) const = 0;
};

struct ToyEncoderConfig {
    int hidden_dim = 32;
    int max_positions = 512;
    int ffn_dim = 128;
    int layers = 2;
    std::uint64_t seed = 0;
    double init_std = 0.08;
};

/// Two-layer self-attention encoder with a learned-from-scratch word
/// vocabulary; every architecture and test runs on it without pretrained
/// weights.
class ToyEncoder : public SentenceEncoder {
public:
    ToyEncoder(Vocabulary vocab, ToyEncoderConfig config);

    int hidden_dim() const override { return config_.hidden_dim; }
    int max_positions() const override { return config_.max_positions; }
    bool supports_segment_pairs() const override { return true; }
    std::string identifier() const override;
    const Vocabulary& vocab() const override { return vocab_; }
    nn::ParameterSet& parameters() const override { return params_; }

    nn::Var encode_cls(nn::Graph& g, const std::vector<int>& tokens) const override;
    nn::Var encode_cls_pair(nn::Graph& g, const std::vector<int>& segment_a,
                            const std::vector<int>& segment_b) const override;

    const ToyEncoderConfig& config() const { return config_; }

private:
    Vocabulary vocab_;
    ToyEncoderConfig config_;
    mutable nn::ParameterSet params_;
    nn::Parameter* tok_emb_ = nullptr;
    nn::Parameter* pos_emb_ = nullptr;
    nn::Parameter* seg_emb_ = nullptr;
    std::vector<nn::EncoderBlockParams> blocks_;

    nn::Var run(nn::Graph& g, const std::vector<int>& ids, const std::vector<int>& segments) const;
};

using EncoderFactory = std::function<std::shared_ptr<SentenceEncoder>(
    const EncoderSpec&, const Vocabulary&, std::uint64_t seed)>;

/// Seam for a pretrained-encoder backend; none is bundled.
void register_pretrained_encoder_factory(EncoderFactory factory);

/// Builds the encoder for a spec. Requesting the pretrained kind without a
/// registered backend raises ConfigError.
std::shared_ptr<SentenceEncoder> make_encoder(const EncoderSpec& spec, const Vocabulary& vocab,
                                              std::uint64_t seed);

/// One of the six architectures over a shared encoder. Prediction is a pure
/// function of (weights, sample, spec); training mutates weights through
/// trainable_parameters().
class ContextClassifier {
public:
    ContextClassifier(ModelSpec spec, std::shared_ptr<SentenceEncoder> encoder,
                      std::uint64_t seed);

    const ModelSpec& spec() const { return spec_; }
    SentenceEncoder& encoder() { return *encoder_; }
    const SentenceEncoder& encoder() const { return *encoder_; }
    std::shared_ptr<SentenceEncoder> encoder_ptr() const { return encoder_; }

    /// Probability of the toxic class.
    double predict(const corpus::Sample& sample) const;
    /// Threshold applied (predicted = 1 iff probability >= threshold).
    int classify(const corpus::Sample& sample) const;

    /// Tape-path probability (1x1) for training.
    nn::Var predict_var(nn::Graph& g, const corpus::Sample& sample) const;

    /// History representation H for the CONTEXT_* architectures (1 x d);
    /// all-zeros for an empty context.
    nn::Var history_var(nn::Graph& g, const corpus::Sample& sample) const;

    std::vector<nn::Parameter*> trainable_parameters();
    nn::ParameterSet& head_parameters() const { return head_; }

    /// Token ids of an utterance under the per-utterance budget.
    std::vector<int> utterance_tokens(const corpus::Utterance& u) const;

private:
    ModelSpec spec_;
    std::shared_ptr<SentenceEncoder> encoder_;
    mutable nn::ParameterSet head_;
    nn::GruParams gru_; // CONTEXT_RNN only
    nn::Parameter* w_ = nullptr;
    nn::Parameter* b_ = nullptr;
};

// ---------------------------------------------------------------------------
// Operation-level entry points (value paths over a scratch tape).
// ---------------------------------------------------------------------------

/// Summary-token embedding of one utterance's tokens.
UtteranceEmbedding encode_utterance(const SentenceEncoder& encoder, const std::vector<int>& tokens);

/// CLS of the separator-joined, most-recent-first context concatenation;
/// zero vector for an empty context.
HistoryRepresentation summarize_context_single(const SentenceEncoder& encoder,
                                               const std::vector<std::vector<int>>& context);

/// Elementwise sum of context embeddings; zero vector for an empty context.
HistoryRepresentation summarize_context_sum(const std::vector<UtteranceEmbedding>& embeddings,
                                            int hidden_dim);

/// Final GRU hidden state over chronological context embeddings; zero vector
/// for an empty context.
HistoryRepresentation summarize_context_rnn(const std::vector<UtteranceEmbedding>& embeddings,
                                            const nn::GruParams& weights, int hidden_dim);

} // namespace contextox::models
