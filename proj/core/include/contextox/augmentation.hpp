#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "contextox/causal_lm.hpp"
#include "contextox/corpus.hpp"

namespace contextox::augmentation {

enum class Polarity { TOXIC, NONTOXIC };

std::string to_string(Polarity p);
Polarity polarity_from_string(const std::string& s);

enum class GeneratorKind { GENERATIVE, TRANSFORMATIVE };

std::string to_string(GeneratorKind k);
GeneratorKind generator_kind_from_string(const std::string& s);

enum class PromptSource { CONTEXT, TARGET };

/// Which part of a sample seeds the generation for a setup: the context
/// prompts target generation, except for flip-context where the target
/// prompts context generation.
PromptSource prompt_source_for(corpus::AugSetup setup);

struct SamplingParams {
    double top_p = 0.9;
    int top_k = 30;
    double repetition_penalty = 1.2;
    int max_new_tokens = 40;

    void validate() const;
};

struct LMSpec {
    std::string base = "toy"; // published checkpoint id for a pretrained backend
    Polarity polarity = Polarity::TOXIC;
    SamplingParams sampling;

    void validate() const;
};

struct AugmentationPlan {
    corpus::AugSetup setup = corpus::AugSetup::BALANCE;
    int count = 0;
    int label = 1;        // forced by setup
    PromptSource prompt_source = PromptSource::CONTEXT;
    GeneratorKind generator = GeneratorKind::GENERATIVE;

    static AugmentationPlan make(corpus::AugSetup setup, int count,
                                 GeneratorKind generator = GeneratorKind::GENERATIVE);
    void validate() const;
};

/// The adversarial default: 5000 1-0 flip targets, 500 0-1 flip targets,
/// 5000 flip contexts.
std::vector<AugmentationPlan> standard_flip_plans(GeneratorKind kind = GeneratorKind::GENERATIVE);

/// Everything needed to regenerate a synthetic example byte-identically:
/// the setup fixes the label, prompt source and LM polarity; the seed fixes
/// the sampling path; the prompt sample supplies the prompt text.
struct Provenance {
    corpus::AugSetup setup = corpus::AugSetup::BALANCE;
    GeneratorKind generator = GeneratorKind::GENERATIVE;
    std::uint64_t seed = 0;
    std::string prompt_sample_id;
};

struct SyntheticExample {
    corpus::Sample sample;
    Provenance provenance;
};

// ---------------------------------------------------------------------------
// Fine-tuning.
// ---------------------------------------------------------------------------

struct FinetuneConfig {
    int batch_size = 16;
    int patience_epochs = 5;
    int max_epochs = 30;
    double learning_rate = 1e-3;
    double weight_decay = 0.01;
    std::uint64_t seed = 0;
    double valid_fraction = 0.1;

    void validate() const;
};

struct FinetuneReport {
    std::vector<double> train_loss;
    std::vector<double> valid_loss;
    int best_epoch = 0;
};

/// Fine-tunes a copy of the base LM on one polarity's texts with early
/// stopping on held-out loss. The corpus must be non-empty.
std::pair<std::unique_ptr<ToyCausalLM>, FinetuneReport> finetune_causal_lm(
    const ToyCausalLM& base, const std::vector<std::string>& corpus_texts,
    const FinetuneConfig& config);

// ---------------------------------------------------------------------------
// Sampling.
// ---------------------------------------------------------------------------

/// Nucleus + top-k sampling with repetition penalty: logits of tokens
/// already in the sequence (prompt and generated) are divided by the penalty
/// when positive and multiplied when negative, before filtering. Stops at
/// the end token or max_new_tokens. Deterministic for a fixed seed.
std::vector<int> sample_continuation_ids(const CausalLanguageModel& lm,
                                         const std::vector<int>& prompt_ids,
                                         const SamplingParams& params, std::uint64_t seed);

std::string sample_continuation(const CausalLanguageModel& lm, const std::string& prompt_text,
                                const SamplingParams& params, std::uint64_t seed);

/// Prompt string for a sample: the prompt utterances newline-joined, then
/// the reserved separator line. Normalized text is used throughout.
std::string build_prompt(const corpus::Sample& sample, PromptSource source);

/// Re-runs the generation recorded in a provenance entry.
std::string regenerate_text(const CausalLanguageModel& lm, const Provenance& provenance,
                            const corpus::Sample& prompt_sample, const SamplingParams& params);

// ---------------------------------------------------------------------------
// Synthesis.
// ---------------------------------------------------------------------------

struct BalanceResult {
    corpus::DatasetSplit split;
    std::vector<SyntheticExample> added;
    bool was_noop = false;
    std::vector<std::string> warnings;
};

/// Adds synthetic toxic samples (toxic-LM continuations of sampled
/// non-toxic contexts) until the split reaches 50-50; real samples are
/// untouched. A split at or above 50% toxic is returned unchanged with a
/// warning.
BalanceResult synthesize_balanced_toxic(const corpus::DatasetSplit& train, const ToyCausalLM& lm,
                                        const SamplingParams& params, std::uint64_t seed);

struct FlipSetResult {
    std::vector<SyntheticExample> examples;
    bool sampled_with_replacement = false;
};

/// Generates the adversarial flip sets. Labels: flip-10 targets 0, flip-01
/// targets 1, flip contexts 1. A prompt pool smaller than the requested
/// count is sampled with replacement and flagged.
FlipSetResult synthesize_flip_sets(const corpus::DatasetSplit& train, const ToyCausalLM& toxic_lm,
                                   const ToyCausalLM& nontoxic_lm,
                                   const std::vector<AugmentationPlan>& plans,
                                   const SamplingParams& params, std::uint64_t seed);

enum class AssembleMode { SYNT_PLUS_REAL, SYNT_ONLY };

std::string to_string(AssembleMode m);
AssembleMode assemble_mode_from_string(const std::string& s);

struct AssembleResult {
    corpus::DatasetSplit split;
    bool used_all_synthetic = false; // SYNT_ONLY had fewer synthetic than real
};

/// SYNT_PLUS_REAL is the union; SYNT_ONLY subsamples the synthetic pool to
/// the real split's size (all of it, flagged, when the pool is smaller).
AssembleResult assemble_variants(const corpus::DatasetSplit& real,
                                 const std::vector<SyntheticExample>& synthetic, AssembleMode mode,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Serialization (canonical sample JSONL plus a "provenance" object).
// ---------------------------------------------------------------------------

void write_synthetic(const std::string& path, const std::vector<SyntheticExample>& examples);
std::vector<SyntheticExample> load_synthetic(const std::string& path);

} // namespace contextox::augmentation
