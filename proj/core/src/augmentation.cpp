#include "contextox/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "contextox/errors.hpp"
#include "contextox/nn/optimizer.hpp"
#include "contextox/rng.hpp"
#include "contextox/textnorm.hpp"
#include "contextox/training.hpp"
#include "json_detail.hpp"

namespace contextox::augmentation {

using corpus::AugSetup;
using corpus::Sample;
using nlohmann::json;

std::string to_string(Polarity p) { return p == Polarity::TOXIC ? "toxic" : "nontoxic"; }

Polarity polarity_from_string(const std::string& s) {
    if (s == "toxic") return Polarity::TOXIC;
    if (s == "nontoxic") return Polarity::NONTOXIC;
    throw ConfigError("unknown polarity: '" + s + "'");
}

std::string to_string(GeneratorKind k) {
    return k == GeneratorKind::GENERATIVE ? "generative" : "transformative";
}

GeneratorKind generator_kind_from_string(const std::string& s) {
    if (s == "generative") return GeneratorKind::GENERATIVE;
    if (s == "transformative") return GeneratorKind::TRANSFORMATIVE;
    throw ConfigError("unknown generator kind: '" + s + "'");
}

PromptSource prompt_source_for(AugSetup setup) {
    return setup == AugSetup::FLIP_CONTEXT ? PromptSource::TARGET : PromptSource::CONTEXT;
}

void SamplingParams::validate() const {
    if (top_p <= 0.0 || top_p > 1.0) throw ConfigError("top_p must lie in (0,1]");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (repetition_penalty < 1.0) throw ConfigError("repetition_penalty must be >= 1");
    if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be >= 1");
}

void LMSpec::validate() const {
    if (base.empty()) throw ConfigError("LM base identifier must be non-empty");
    sampling.validate();
}

AugmentationPlan AugmentationPlan::make(AugSetup setup, int count, GeneratorKind generator) {
    AugmentationPlan plan;
    plan.setup = setup;
    plan.count = count;
    plan.label = corpus::assigned_label(setup);
    plan.prompt_source = prompt_source_for(setup);
    plan.generator = generator;
    return plan;
}

void AugmentationPlan::validate() const {
    if (count < 0) throw ConfigError("augmentation plan count must be >= 0");
    if (label != corpus::assigned_label(setup)) {
        throw ConfigError("augmentation plan label contradicts its setup");
    }
    if (prompt_source != prompt_source_for(setup)) {
        throw ConfigError("augmentation plan prompt source contradicts its setup");
    }
}

std::vector<AugmentationPlan> standard_flip_plans(GeneratorKind kind) {
    return {AugmentationPlan::make(AugSetup::FLIP_10_TARGET, 5000, kind),
            AugmentationPlan::make(AugSetup::FLIP_01_TARGET, 500, kind),
            AugmentationPlan::make(AugSetup::FLIP_CONTEXT, 5000, kind)};
}

// ---------------------------------------------------------------------------
// Fine-tuning.
// ---------------------------------------------------------------------------

void FinetuneConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience_epochs < 1) throw ConfigError("patience_epochs must be >= 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (valid_fraction <= 0.0 || valid_fraction >= 1.0) {
        throw ConfigError("valid_fraction must lie in (0,1)");
    }
}

namespace {

double mean_token_nll(const ToyCausalLM& lm, const std::vector<std::vector<int>>& texts) {
    double nll = 0.0;
    long tokens = 0;
    for (const std::vector<int>& ids : texts) {
        nn::Graph g;
        nll += g.value(lm.sequence_nll_var(g, ids))(0, 0);
        tokens += static_cast<long>(ids.size()) + 1;
    }
    return nll / static_cast<double>(tokens);
}

} // namespace

std::pair<std::unique_ptr<ToyCausalLM>, FinetuneReport> finetune_causal_lm(
    const ToyCausalLM& base, const std::vector<std::string>& corpus_texts,
    const FinetuneConfig& config) {
    config.validate();
    if (corpus_texts.empty()) throw ConfigError("fine-tuning corpus is empty");

    std::unique_ptr<ToyCausalLM> lm = base.clone();
    std::vector<std::vector<int>> encoded;
    encoded.reserve(corpus_texts.size());
    for (const std::string& t : corpus_texts) encoded.push_back(lm->vocab().encode(t));

    // Deterministic held-out slice.
    std::vector<std::size_t> order(encoded.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(mix_seed(config.seed, 7));
    split_rng.shuffle(order);
    std::vector<std::vector<int>> train_texts;
    std::vector<std::vector<int>> valid_texts;
    if (encoded.size() == 1) {
        train_texts = encoded;
        valid_texts = encoded;
    } else {
        auto n_valid = static_cast<std::size_t>(
            std::floor(config.valid_fraction * static_cast<double>(encoded.size())));
        n_valid = std::clamp<std::size_t>(n_valid, 1, encoded.size() - 1);
        for (std::size_t i = 0; i < order.size(); ++i) {
            (i < n_valid ? valid_texts : train_texts).push_back(encoded[order[i]]);
        }
    }

    std::vector<nn::Parameter*> params = lm->parameters().all();
    nn::AdamWConfig opt_cfg;
    opt_cfg.learning_rate = config.learning_rate;
    opt_cfg.weight_decay = config.weight_decay;
    nn::AdamW optimizer(params, opt_cfg);
    lm->parameters().zero_grads();

    FinetuneReport report;
    training::EarlyStopper stopper(config.patience_epochs);
    std::vector<nn::Matrix> best_values;

    std::vector<std::size_t> train_order(train_texts.size());
    std::iota(train_order.begin(), train_order.end(), 0);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(config.seed, 0x100 + static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(train_order);

        double epoch_nll = 0.0;
        long epoch_tokens = 0;
        int batch_index = 0;
        for (std::size_t start = 0; start < train_order.size();
             start += static_cast<std::size_t>(config.batch_size), ++batch_index) {
            const std::size_t end = std::min(train_order.size(),
                                             start + static_cast<std::size_t>(config.batch_size));
            nn::Graph g;
            nn::Var total;
            long batch_tokens = 0;
            for (std::size_t k = start; k < end; ++k) {
                const std::vector<int>& ids = train_texts[train_order[k]];
                nn::Var nll = lm->sequence_nll_var(g, ids);
                total = total.valid() ? g.add(total, nll) : nll;
                batch_tokens += static_cast<long>(ids.size()) + 1;
            }
            nn::Var loss = g.scale(total, 1.0 / static_cast<double>(batch_tokens));
            const double loss_value = g.value(loss)(0, 0);
            if (!std::isfinite(loss_value)) {
                throw TrainingDivergedError("non-finite LM fine-tuning loss", epoch, batch_index);
            }
            g.backward(loss);
            optimizer.step();
            epoch_nll += loss_value * static_cast<double>(batch_tokens);
            epoch_tokens += batch_tokens;
        }
        report.train_loss.push_back(epoch_nll / static_cast<double>(epoch_tokens));

        const double valid_nll = mean_token_nll(*lm, valid_texts);
        report.valid_loss.push_back(valid_nll);
        if (stopper.observe(epoch, valid_nll)) {
            best_values.clear();
            for (const nn::Parameter* p : params) best_values.push_back(p->value);
        }
        if (stopper.should_stop(epoch)) break;
    }
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
    report.best_epoch = stopper.best_epoch();
    return {std::move(lm), std::move(report)};
}

// ---------------------------------------------------------------------------
// Sampling.
// ---------------------------------------------------------------------------

std::vector<int> sample_continuation_ids(const CausalLanguageModel& lm,
                                         const std::vector<int>& prompt_ids,
                                         const SamplingParams& params, std::uint64_t seed) {
    params.validate();
    if (prompt_ids.empty()) throw ConfigError("sampling prompt must be non-empty");

    Rng rng(seed);
    std::vector<int> seq;
    seq.reserve(prompt_ids.size() + static_cast<std::size_t>(params.max_new_tokens) + 1);
    seq.push_back(Vocabulary::kBos);
    seq.insert(seq.end(), prompt_ids.begin(), prompt_ids.end());

    std::vector<int> generated;
    std::vector<char> in_sequence(static_cast<std::size_t>(lm.vocab().size()), 0);
    for (int id : seq) in_sequence[static_cast<std::size_t>(id)] = 1;

    const int vocab_size = lm.vocab().size();
    for (int step = 0; step < params.max_new_tokens; ++step) {
        Eigen::RowVectorXd logits = lm.next_logits(seq);

        // Penalize tokens already in the sequence (prompt and generated):
        // positive logits shrink, negative logits grow more negative.
        if (params.repetition_penalty != 1.0) {
            for (int v = 0; v < vocab_size; ++v) {
                if (!in_sequence[static_cast<std::size_t>(v)]) continue;
                logits(v) = logits(v) > 0.0 ? logits(v) / params.repetition_penalty
                                            : logits(v) * params.repetition_penalty;
            }
        }

        // Rank candidates by (logit desc, index asc) for a stable order.
        std::vector<int> cand(static_cast<std::size_t>(vocab_size));
        std::iota(cand.begin(), cand.end(), 0);
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
            if (logits(a) != logits(b)) return logits(a) > logits(b);
            return a < b;
        });
        const int keep_k = std::min(params.top_k, vocab_size);
        cand.resize(static_cast<std::size_t>(keep_k));

        // Softmax over the top-k survivors.
        double max_logit = logits(cand[0]);
        std::vector<double> probs(cand.size());
        double z = 0.0;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            probs[i] = std::exp(logits(cand[i]) - max_logit);
            z += probs[i];
        }
        for (double& p : probs) p /= z;

        // Nucleus: smallest prefix of the sorted candidates reaching top_p.
        std::size_t keep = cand.size();
        double cum = 0.0;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            cum += probs[i];
            if (cum >= params.top_p) {
                keep = i + 1;
                break;
            }
        }
        double kept_mass = 0.0;
        for (std::size_t i = 0; i < keep; ++i) kept_mass += probs[i];

        const double u = rng.uniform() * kept_mass;
        double acc = 0.0;
        int chosen = cand[keep - 1];
        for (std::size_t i = 0; i < keep; ++i) {
            acc += probs[i];
            if (u < acc) {
                chosen = cand[i];
                break;
            }
        }

        if (chosen == lm.end_token_id()) break;
        generated.push_back(chosen);
        seq.push_back(chosen);
        in_sequence[static_cast<std::size_t>(chosen)] = 1;
    }
    return generated;
}

std::string sample_continuation(const CausalLanguageModel& lm, const std::string& prompt_text,
                                const SamplingParams& params, std::uint64_t seed) {
    const std::vector<int> prompt_ids = lm.vocab().encode(prompt_text);
    const std::vector<int> out = sample_continuation_ids(lm, prompt_ids, params, seed);
    return lm.vocab().decode(out);
}

std::string build_prompt(const Sample& sample, PromptSource source) {
    std::string prompt;
    if (source == PromptSource::CONTEXT) {
        for (const corpus::Utterance& u : sample.context) {
            prompt += u.norm_text;
            prompt += '\n';
        }
    } else {
        prompt += sample.target.norm_text;
        prompt += '\n';
    }
    prompt += kGenerationSeparator;
    prompt += '\n';
    return prompt;
}

std::string regenerate_text(const CausalLanguageModel& lm, const Provenance& provenance,
                            const Sample& prompt_sample, const SamplingParams& params) {
    const std::string prompt = build_prompt(prompt_sample, prompt_source_for(provenance.setup));
    return sample_continuation(lm, prompt, params, provenance.seed);
}

// ---------------------------------------------------------------------------
// Synthesis.
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kEmptyGeneration = "<empty>";

std::vector<const Sample*> prompt_pool(const corpus::DatasetSplit& split, AugSetup setup) {
    std::vector<const Sample*> pool;
    for (const Sample& s : split.samples) {
        switch (setup) {
            case AugSetup::BALANCE:
            case AugSetup::FLIP_10_TARGET:
                if (s.label == 0 && !s.context.empty()) pool.push_back(&s);
                break;
            case AugSetup::FLIP_01_TARGET:
                if (s.label == 1 && !s.context.empty()) pool.push_back(&s);
                break;
            case AugSetup::FLIP_CONTEXT:
                if (s.label == 0) pool.push_back(&s);
                break;
        }
    }
    return pool;
}

std::vector<const Sample*> draw_prompts(const std::vector<const Sample*>& pool, std::size_t count,
                                        std::uint64_t seed, bool& with_replacement) {
    std::vector<const Sample*> out;
    out.reserve(count);
    Rng rng(seed);
    if (pool.size() >= count) {
        std::vector<std::size_t> idx(pool.size());
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        for (std::size_t i = 0; i < count; ++i) out.push_back(pool[idx[i]]);
    } else {
        with_replacement = true;
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(pool[rng.uniform_index(pool.size())]);
        }
    }
    return out;
}

SyntheticExample make_example(AugSetup setup, GeneratorKind kind, std::uint64_t example_seed,
                              const Sample& prompt_sample, const std::string& generated_text,
                              std::size_t index) {
    const std::string text = generated_text.empty() ? kEmptyGeneration : generated_text;
    corpus::Utterance gen;
    gen.speaker_id = "generator";
    gen.raw_text = text;
    gen.norm_text = textnorm::normalize_text(text);

    Sample s;
    s.sample_id = "syn:" + corpus::to_string(setup) + ":" + std::to_string(index);
    s.source = corpus::Source::SYNTHETIC;
    s.origin = corpus::Origin::SYNTHETIC;
    s.aug_setup = setup;
    s.label = corpus::assigned_label(setup);

    if (setup == AugSetup::FLIP_CONTEXT) {
        // Generated text becomes the context of the real non-toxic target.
        gen.position = 0;
        s.context.push_back(gen);
        s.target = prompt_sample.target;
        s.target.position = 1;
    } else {
        s.context = prompt_sample.context;
        gen.position = static_cast<int>(s.context.size());
        s.target = gen;
    }

    SyntheticExample ex;
    ex.sample = std::move(s);
    ex.provenance = Provenance{setup, kind, example_seed, prompt_sample.sample_id};
    return ex;
}

std::uint64_t setup_stream(AugSetup setup) {
    switch (setup) {
        case AugSetup::BALANCE: return 0xB0;
        case AugSetup::FLIP_10_TARGET: return 0xB1;
        case AugSetup::FLIP_01_TARGET: return 0xB2;
        case AugSetup::FLIP_CONTEXT: return 0xB3;
    }
    return 0xB0;
}

std::vector<SyntheticExample> generate_for_setup(AugSetup setup, std::size_t count,
                                                 const corpus::DatasetSplit& split,
                                                 const ToyCausalLM& lm,
                                                 const SamplingParams& params, std::uint64_t seed,
                                                 bool& with_replacement) {
    std::vector<SyntheticExample> out;
    if (count == 0) return out;
    const std::vector<const Sample*> pool = prompt_pool(split, setup);
    if (pool.empty()) {
        throw IntegrityError("no eligible prompt samples in the split for setup '" +
                             corpus::to_string(setup) + "'");
    }
    const std::uint64_t stream = mix_seed(seed, setup_stream(setup));
    const std::vector<const Sample*> prompts =
        draw_prompts(pool, count, mix_seed(stream, 1), with_replacement);
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Sample& prompt_sample = *prompts[i];
        const std::uint64_t example_seed = mix_seed(stream, 1000 + i);
        const std::string prompt = build_prompt(prompt_sample, prompt_source_for(setup));
        const std::string text = sample_continuation(lm, prompt, params, example_seed);
        out.push_back(make_example(setup, GeneratorKind::GENERATIVE, example_seed, prompt_sample,
                                   text, i));
    }
    return out;
}

} // namespace

BalanceResult synthesize_balanced_toxic(const corpus::DatasetSplit& train, const ToyCausalLM& lm,
                                        const SamplingParams& params, std::uint64_t seed) {
    BalanceResult result;
    result.split = train;
    std::size_t toxic = 0;
    for (const Sample& s : train.samples) toxic += static_cast<std::size_t>(s.label == 1);
    const std::size_t nontoxic = train.samples.size() - toxic;
    if (toxic >= nontoxic) {
        result.was_noop = true;
        result.warnings.push_back("split is already balanced (toxic ratio >= 0.5); nothing added");
        return result;
    }
    const std::size_t need = nontoxic - toxic;
    bool with_replacement = false;
    result.added = generate_for_setup(AugSetup::BALANCE, need, train, lm, params, seed,
                                      with_replacement);
    if (with_replacement) {
        result.warnings.push_back("prompt pool smaller than requested count; sampled with "
                                  "replacement");
    }
    for (const SyntheticExample& ex : result.added) result.split.samples.push_back(ex.sample);
    return result;
}

FlipSetResult synthesize_flip_sets(const corpus::DatasetSplit& train, const ToyCausalLM& toxic_lm,
                                   const ToyCausalLM& nontoxic_lm,
                                   const std::vector<AugmentationPlan>& plans,
                                   const SamplingParams& params, std::uint64_t seed) {
    FlipSetResult result;
    for (const AugmentationPlan& plan : plans) {
        plan.validate();
        if (plan.setup == AugSetup::BALANCE) {
            throw ConfigError("balance is not a flip setup; use synthesize_balanced_toxic");
        }
        // The 0-1 flip rewrites with the non-toxic LM; the others inject
        // toxic text.
        const ToyCausalLM& lm =
            plan.setup == AugSetup::FLIP_01_TARGET ? nontoxic_lm : toxic_lm;
        bool with_replacement = false;
        std::vector<SyntheticExample> batch =
            generate_for_setup(plan.setup, static_cast<std::size_t>(plan.count), train, lm, params,
                               seed, with_replacement);
        result.sampled_with_replacement |= with_replacement;
        result.examples.insert(result.examples.end(), std::make_move_iterator(batch.begin()),
                               std::make_move_iterator(batch.end()));
    }
    return result;
}

std::string to_string(AssembleMode m) {
    return m == AssembleMode::SYNT_PLUS_REAL ? "synt+real" : "synt";
}

AssembleMode assemble_mode_from_string(const std::string& s) {
    if (s == "synt+real") return AssembleMode::SYNT_PLUS_REAL;
    if (s == "synt") return AssembleMode::SYNT_ONLY;
    throw ConfigError("unknown assemble mode: '" + s + "' (expected 'synt+real' or 'synt')");
}

AssembleResult assemble_variants(const corpus::DatasetSplit& real,
                                 const std::vector<SyntheticExample>& synthetic, AssembleMode mode,
                                 std::uint64_t seed) {
    AssembleResult result;
    result.split.name = real.name;
    if (mode == AssembleMode::SYNT_PLUS_REAL) {
        result.split.samples = real.samples;
        for (const SyntheticExample& ex : synthetic) result.split.samples.push_back(ex.sample);
    } else {
        std::vector<std::size_t> idx(synthetic.size());
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(mix_seed(seed, 0xA55E));
        rng.shuffle(idx);
        const std::size_t take = std::min(real.samples.size(), synthetic.size());
        result.used_all_synthetic = synthetic.size() < real.samples.size();
        result.split.samples.reserve(take);
        for (std::size_t i = 0; i < take; ++i) {
            result.split.samples.push_back(synthetic[idx[i]].sample);
        }
    }
    std::unordered_set<std::string> ids;
    for (const Sample& s : result.split.samples) {
        if (!ids.insert(s.sample_id).second) {
            throw IntegrityError("duplicate sample_id '" + s.sample_id +
                                 "' when assembling training variants");
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Serialization.
// ---------------------------------------------------------------------------

void write_synthetic(const std::string& path, const std::vector<SyntheticExample>& examples) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write synthetic set: " + path);
    for (const SyntheticExample& ex : examples) {
        json j = corpus::detail::sample_to_json(ex.sample);
        j["provenance"] = {{"setup", corpus::to_string(ex.provenance.setup)},
                           {"generator", to_string(ex.provenance.generator)},
                           {"seed", ex.provenance.seed},
                           {"prompt_sample_id", ex.provenance.prompt_sample_id}};
        out << j.dump() << '\n';
    }
}

std::vector<SyntheticExample> load_synthetic(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synthetic set: " + path);
    std::vector<SyntheticExample> out;
    std::string line;
    long line_no = 0;
    const textnorm::NormRules rules = textnorm::NormRules::defaults();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json rec = corpus::detail::parse_line(line, line_no);
        SyntheticExample ex;
        ex.sample = corpus::detail::sample_from_json(rec, line_no, rules);
        if (!rec.contains("provenance") || !rec.at("provenance").is_object()) {
            throw ParseError("synthetic record lacks a 'provenance' object", line_no);
        }
        const json& p = rec.at("provenance");
        ex.provenance.setup = corpus::aug_setup_from_string(p.at("setup").get<std::string>());
        ex.provenance.generator = generator_kind_from_string(p.at("generator").get<std::string>());
        ex.provenance.seed = p.at("seed").get<std::uint64_t>();
        ex.provenance.prompt_sample_id = p.at("prompt_sample_id").get<std::string>();
        out.push_back(std::move(ex));
    }
    return out;
}

} // namespace contextox::augmentation
