#include "contextox/models.hpp"

#include <algorithm>

#include "contextox/errors.hpp"
#include "contextox/textnorm.hpp"

namespace contextox::models {

std::string to_string(Arch a) {
    switch (a) {
        case Arch::TARGET_ONLY: return "target_only";
        case Arch::TEXT_CONCAT: return "text_concat";
        case Arch::NEXT_SENT_PRED: return "next_sent_pred";
        case Arch::CONTEXT_SINGLE: return "context_single";
        case Arch::CONTEXT_SUM: return "context_sum";
        case Arch::CONTEXT_RNN: return "context_rnn";
    }
    return "target_only";
}

Arch arch_from_string(const std::string& s) {
    if (s == "target_only") return Arch::TARGET_ONLY;
    if (s == "text_concat") return Arch::TEXT_CONCAT;
    if (s == "next_sent_pred") return Arch::NEXT_SENT_PRED;
    if (s == "context_single") return Arch::CONTEXT_SINGLE;
    if (s == "context_sum") return Arch::CONTEXT_SUM;
    if (s == "context_rnn") return Arch::CONTEXT_RNN;
    throw ConfigError("unknown architecture: '" + s + "'");
}

std::string to_string(EncoderKind k) {
    return k == EncoderKind::TOY ? "toy" : "pretrained_bidirectional";
}

EncoderKind encoder_kind_from_string(const std::string& s) {
    if (s == "toy") return EncoderKind::TOY;
    if (s == "pretrained_bidirectional") return EncoderKind::PRETRAINED_BIDIRECTIONAL;
    throw ConfigError("unknown encoder kind: '" + s + "'");
}

EncoderSpec EncoderSpec::toy(int hidden_dim) {
    EncoderSpec spec;
    spec.kind = EncoderKind::TOY;
    spec.hidden_dim = hidden_dim;
    return spec;
}

EncoderSpec EncoderSpec::pretrained(std::string checkpoint) {
    EncoderSpec spec;
    spec.kind = EncoderKind::PRETRAINED_BIDIRECTIONAL;
    spec.hidden_dim = 768;
    spec.checkpoint = std::move(checkpoint);
    return spec;
}

void EncoderSpec::validate() const {
    if (hidden_dim < 1) throw ConfigError("encoder hidden_dim must be >= 1");
    if (max_positions < 4) throw ConfigError("encoder max_positions must be >= 4");
    if (kind == EncoderKind::PRETRAINED_BIDIRECTIONAL && checkpoint.empty()) {
        throw ConfigError("pretrained encoder requires a checkpoint identifier");
    }
}

void ModelSpec::validate() const {
    encoder.validate();
    if (threshold <= 0.0 || threshold >= 1.0) {
        throw ConfigError("decision threshold must lie in (0,1)");
    }
    if (arch == Arch::CONTEXT_RNN) {
        const int rh = rnn_hidden == 0 ? encoder.hidden_dim : rnn_hidden;
        if (rh != encoder.hidden_dim) {
            throw ConfigError("context_rnn requires rnn_hidden equal to the encoder dimension (got " +
                              std::to_string(rh) + " vs " + std::to_string(encoder.hidden_dim) + ")");
        }
    }
}

// ---------------------------------------------------------------------------
// Toy encoder.
// ---------------------------------------------------------------------------

ToyEncoder::ToyEncoder(Vocabulary vocab, ToyEncoderConfig config)
    : vocab_(std::move(vocab)), config_(config) {
    if (config_.ffn_dim <= 0) config_.ffn_dim = 4 * config_.hidden_dim;
    Rng rng(config_.seed);
    const int d = config_.hidden_dim;
    tok_emb_ = &params_.create_normal("encoder.tok_emb", vocab_.size(), d, rng, config_.init_std);
    pos_emb_ = &params_.create_normal("encoder.pos_emb", config_.max_positions, d, rng,
                                      config_.init_std);
    seg_emb_ = &params_.create_normal("encoder.seg_emb", 2, d, rng, config_.init_std);
    for (int l = 0; l < config_.layers; ++l) {
        blocks_.push_back(nn::EncoderBlockParams::create(
            params_, "encoder.block" + std::to_string(l), d, config_.ffn_dim, rng,
            config_.init_std));
    }
}

std::string ToyEncoder::identifier() const {
    return "toy-d" + std::to_string(config_.hidden_dim) + "-l" + std::to_string(config_.layers);
}

nn::Var ToyEncoder::run(nn::Graph& g, const std::vector<int>& ids,
                        const std::vector<int>& segments) const {
    const int n = static_cast<int>(ids.size());
    std::vector<int> positions(ids.size());
    for (int i = 0; i < n; ++i) positions[static_cast<std::size_t>(i)] = i;

    nn::Var x = g.add(g.gather_rows(g.param(*tok_emb_), ids),
                      g.gather_rows(g.param(*pos_emb_), positions));
    if (!segments.empty()) {
        x = g.add(x, g.gather_rows(g.param(*seg_emb_), segments));
    }
    for (const auto& block : blocks_) x = nn::encoder_block(g, x, block);
    return g.slice_rows(x, 0, 1); // summary (CLS) row
}

nn::Var ToyEncoder::encode_cls(nn::Graph& g, const std::vector<int>& tokens) const {
    // The per-utterance 150-token budget is the caller's job; this caps at
    // the positional window only.
    const auto budget = static_cast<std::size_t>(config_.max_positions) - 2;
    std::vector<int> body = textnorm::truncate_utterance(tokens, budget);
    std::vector<int> ids;
    ids.reserve(body.size() + 2);
    ids.push_back(Vocabulary::kCls);
    ids.insert(ids.end(), body.begin(), body.end());
    ids.push_back(Vocabulary::kSep);
    return run(g, ids, {});
}

nn::Var ToyEncoder::encode_cls_pair(nn::Graph& g, const std::vector<int>& segment_a,
                                    const std::vector<int>& segment_b) const {
    const std::size_t cap = static_cast<std::size_t>(config_.max_positions);
    // [CLS] A [SEP] B [SEP]: three specials around the two segments. The
    // target segment is never sacrificed to the context.
    std::vector<int> b = textnorm::truncate_utterance(segment_b, cap - 3);
    const std::size_t budget_a = cap - b.size() - 3;
    std::vector<int> a = segment_a;
    if (a.size() > budget_a) {
        // Keep the tail: the most recent context sits next to the target.
        a.assign(segment_a.end() - static_cast<long>(budget_a), segment_a.end());
    }
    std::vector<int> ids;
    std::vector<int> segments;
    ids.reserve(a.size() + b.size() + 3);
    ids.push_back(Vocabulary::kCls);
    ids.insert(ids.end(), a.begin(), a.end());
    ids.push_back(Vocabulary::kSep);
    segments.assign(ids.size(), 0);
    ids.insert(ids.end(), b.begin(), b.end());
    ids.push_back(Vocabulary::kSep);
    segments.resize(ids.size(), 1);
    return run(g, ids, segments);
}

namespace {
EncoderFactory& pretrained_factory() {
    static EncoderFactory factory;
    return factory;
}
} // namespace

void register_pretrained_encoder_factory(EncoderFactory factory) {
    pretrained_factory() = std::move(factory);
}

std::shared_ptr<SentenceEncoder> make_encoder(const EncoderSpec& spec, const Vocabulary& vocab,
                                              std::uint64_t seed) {
    spec.validate();
    if (spec.kind == EncoderKind::TOY) {
        ToyEncoderConfig cfg;
        cfg.hidden_dim = spec.hidden_dim;
        cfg.max_positions = spec.max_positions;
        if (spec.ffn_dim > 0) cfg.ffn_dim = spec.ffn_dim;
        else cfg.ffn_dim = 4 * spec.hidden_dim;
        cfg.seed = seed;
        return std::make_shared<ToyEncoder>(vocab, cfg);
    }
    if (!pretrained_factory()) {
        throw ConfigError("no pretrained encoder backend is registered; use the toy encoder or "
                          "register a backend for '" + spec.checkpoint + "'");
    }
    return pretrained_factory()(spec, vocab, seed);
}

// ---------------------------------------------------------------------------
// Classifier.
// ---------------------------------------------------------------------------

ContextClassifier::ContextClassifier(ModelSpec spec, std::shared_ptr<SentenceEncoder> encoder,
                                     std::uint64_t seed)
    : spec_(std::move(spec)), encoder_(std::move(encoder)) {
    spec_.validate();
    if (spec_.rnn_hidden == 0) spec_.rnn_hidden = spec_.encoder.hidden_dim;
    if (spec_.encoder.hidden_dim != encoder_->hidden_dim()) {
        throw ConfigError("encoder spec hidden_dim disagrees with the encoder instance");
    }
    if (spec_.arch == Arch::NEXT_SENT_PRED && !encoder_->supports_segment_pairs()) {
        throw ConfigError("next_sent_pred requires an encoder with segment-pair support");
    }
    Rng rng(mix_seed(seed, 0x68656164)); // head stream
    const int d = encoder_->hidden_dim();
    if (spec_.arch == Arch::CONTEXT_RNN) {
        gru_ = nn::GruParams::create(head_, "model.gru", d, spec_.rnn_hidden, rng, 0.08);
    }
    w_ = &head_.create_normal("model.classifier.w", spec_.classifier_in_dim(), 1, rng, 0.08);
    b_ = &head_.create("model.classifier.b", 1, 1);
}

std::vector<int> ContextClassifier::utterance_tokens(const corpus::Utterance& u) const {
    return textnorm::truncate_utterance(encoder_->vocab().encode(u.norm_text));
}

nn::Var ContextClassifier::history_var(nn::Graph& g, const corpus::Sample& sample) const {
    const int d = encoder_->hidden_dim();
    if (sample.context.empty()) return g.zeros(1, d);
    switch (spec_.arch) {
        case Arch::CONTEXT_SINGLE: {
            // Most-recent-first, separator-joined, oldest truncated away.
            std::vector<int> joined;
            const std::size_t budget = static_cast<std::size_t>(encoder_->max_positions()) - 2;
            for (auto it = sample.context.rbegin(); it != sample.context.rend(); ++it) {
                if (!joined.empty()) {
                    if (joined.size() + 1 >= budget) break;
                    joined.push_back(Vocabulary::kSep);
                }
                for (int id : utterance_tokens(*it)) {
                    if (joined.size() >= budget) break;
                    joined.push_back(id);
                }
                if (joined.size() >= budget) break;
            }
            return encoder_->encode_cls(g, joined);
        }
        case Arch::CONTEXT_SUM: {
            nn::Var h = g.zeros(1, d);
            for (const corpus::Utterance& c : sample.context) {
                h = g.add(h, encoder_->encode_cls(g, utterance_tokens(c)));
            }
            return h;
        }
        case Arch::CONTEXT_RNN: {
            std::vector<nn::Var> inputs;
            inputs.reserve(sample.context.size());
            for (const corpus::Utterance& c : sample.context) {
                inputs.push_back(encoder_->encode_cls(g, utterance_tokens(c)));
            }
            return nn::gru_last_state(g, inputs, gru_, spec_.rnn_hidden);
        }
        default:
            throw ConfigError("history representation is defined only for context architectures");
    }
}

nn::Var ContextClassifier::predict_var(nn::Graph& g, const corpus::Sample& sample) const {
    nn::Var features; // 1 x classifier_in_dim
    switch (spec_.arch) {
        case Arch::TARGET_ONLY:
            features = encoder_->encode_cls(g, utterance_tokens(sample.target));
            break;
        case Arch::TEXT_CONCAT: {
            std::vector<std::vector<int>> ctx;
            ctx.reserve(sample.context.size());
            for (const corpus::Utterance& c : sample.context) ctx.push_back(utterance_tokens(c));
            const auto budget = static_cast<std::size_t>(encoder_->max_positions()) - 2;
            std::vector<int> seq = textnorm::build_concat_input(
                utterance_tokens(sample.target), ctx, budget, Vocabulary::kSep);
            features = encoder_->encode_cls(g, seq);
            break;
        }
        case Arch::NEXT_SENT_PRED: {
            // Segment A: chronological context, separator-joined (trimmed
            // from the front by the encoder when over budget).
            std::vector<int> segment_a;
            for (const corpus::Utterance& c : sample.context) {
                if (!segment_a.empty()) segment_a.push_back(Vocabulary::kSep);
                const auto toks = utterance_tokens(c);
                segment_a.insert(segment_a.end(), toks.begin(), toks.end());
            }
            features = encoder_->encode_cls_pair(g, segment_a, utterance_tokens(sample.target));
            break;
        }
        case Arch::CONTEXT_SINGLE:
        case Arch::CONTEXT_SUM:
        case Arch::CONTEXT_RNN: {
            nn::Var h = history_var(g, sample);
            nn::Var u = encoder_->encode_cls(g, utterance_tokens(sample.target));
            features = g.concat_cols(h, u); // fusion order [H; U_n]
            break;
        }
    }
    nn::Var logit = g.add(g.matmul(features, g.param(*w_)), g.param(*b_));
    return g.sigmoid(logit);
}

double ContextClassifier::predict(const corpus::Sample& sample) const {
    nn::Graph g;
    return g.value(predict_var(g, sample))(0, 0);
}

int ContextClassifier::classify(const corpus::Sample& sample) const {
    return predict(sample) >= spec_.threshold ? 1 : 0;
}

std::vector<nn::Parameter*> ContextClassifier::trainable_parameters() {
    std::vector<nn::Parameter*> out = encoder_->parameters().all();
    for (nn::Parameter* p : head_.all()) out.push_back(p);
    return out;
}

// ---------------------------------------------------------------------------
// Operation-level entry points.
// ---------------------------------------------------------------------------

UtteranceEmbedding encode_utterance(const SentenceEncoder& encoder,
                                    const std::vector<int>& tokens) {
    nn::Graph g;
    return g.value(encoder.encode_cls(g, textnorm::truncate_utterance(tokens))).row(0);
}

HistoryRepresentation summarize_context_single(const SentenceEncoder& encoder,
                                               const std::vector<std::vector<int>>& context) {
    if (context.empty()) return HistoryRepresentation::Zero(encoder.hidden_dim());
    std::vector<int> joined;
    for (auto it = context.rbegin(); it != context.rend(); ++it) {
        if (!joined.empty()) joined.push_back(Vocabulary::kSep);
        joined.insert(joined.end(), it->begin(), it->end());
    }
    nn::Graph g;
    return g.value(encoder.encode_cls(g, joined)).row(0);
}

HistoryRepresentation summarize_context_sum(const std::vector<UtteranceEmbedding>& embeddings,
                                            int hidden_dim) {
    HistoryRepresentation h = HistoryRepresentation::Zero(hidden_dim);
    for (const UtteranceEmbedding& e : embeddings) {
        if (e.size() != hidden_dim) throw IntegrityError("context embedding dimension mismatch");
        h += e;
    }
    return h;
}

HistoryRepresentation summarize_context_rnn(const std::vector<UtteranceEmbedding>& embeddings,
                                            const nn::GruParams& weights, int hidden_dim) {
    nn::Graph g;
    std::vector<nn::Var> inputs;
    inputs.reserve(embeddings.size());
    for (const UtteranceEmbedding& e : embeddings) {
        if (e.size() != hidden_dim) throw IntegrityError("context embedding dimension mismatch");
        inputs.push_back(g.input(e));
    }
    return g.value(nn::gru_last_state(g, inputs, weights, hidden_dim)).row(0);
}

} // namespace contextox::models
