#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "contextox/corpus.hpp"

namespace contextox::evaluation {

// ---------------------------------------------------------------------------
// Metrics.
// ---------------------------------------------------------------------------

struct PredictionRecord {
    std::string sample_id;
    double probability = 0.0;
    int predicted = 0; // 1 iff probability >= threshold
    int gold = 0;
};

PredictionRecord make_record(std::string sample_id, double probability, int gold,
                             double threshold = 0.5);

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;
    long total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(const std::vector<PredictionRecord>& records);

/// Precision/recall/F1 with toxic (1) as the positive class; 0/0 -> 0.
double precision_toxic(const std::vector<PredictionRecord>& records);
double recall_toxic(const std::vector<PredictionRecord>& records);
double f1_toxic(const std::vector<PredictionRecord>& records);

/// FP / (FP + TN); absent when there are no gold negatives.
std::optional<double> fpr(const std::vector<PredictionRecord>& records);

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov equality test.
// ---------------------------------------------------------------------------

struct KsResult {
    double d = 0.0;
    double p_value = 1.0;
};

/// D = sup |ECDF_A - ECDF_B|, p-value from the asymptotic Kolmogorov
/// distribution at sqrt(n_eff) * D with n_eff = nA*nB/(nA+nB).
KsResult ks_2sample(const std::vector<double>& a, const std::vector<double>& b);

/// Survival function Q(lambda) of the Kolmogorov distribution.
double kolmogorov_sf(double lambda);

// ---------------------------------------------------------------------------
// Lexicon baseline.
// ---------------------------------------------------------------------------

/// Case-insensitive whole-word/whole-phrase term list. File format: UTF-8,
/// one term per line, '#' starts a comment.
class Lexicon {
public:
    static Lexicon load(const std::string& path);
    static Lexicon from_terms(std::vector<std::string> terms);

    const std::vector<std::string>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

private:
    std::vector<std::string> terms_; // folded, whitespace-collapsed
};

/// 1 iff any lexicon term occurs as a whole word (or whole phrase) of the
/// normalized text. Word characters are ASCII alphanumerics, '_' and all
/// non-ASCII bytes, so multi-byte letters never split a boundary.
int lexicon_classify(const std::string& norm_text, const Lexicon& lexicon);

// ---------------------------------------------------------------------------
// Commercial-provider score mapping (offline; replay cache only).
// ---------------------------------------------------------------------------

enum class Provider { PERSPECTIVE, AZURE, CLARIFAI };

std::string to_string(Provider p);
Provider provider_from_string(const std::string& s);

/// Collapses a provider's per-category scores to one toxicity score:
/// Perspective projects "toxicity", Azure takes the max of its three
/// categories ("category1".."category3"), Clarifai projects "toxic".
/// A missing required category raises IntegrityError naming it.
double map_api_scores(Provider provider, const std::map<std::string, double>& category_scores);

/// Pluggable provider seam. Live HTTP clients are intentionally absent;
/// implementations supply cached or computed category scores.
class ScoreProvider {
public:
    virtual ~ScoreProvider() = default;
    virtual Provider provider() const = 0;
    virtual std::map<std::string, double> categories(const std::string& sample_id) const = 0;
};

/// Reads a JSONL cache: {"sample_id": str, "provider": str,
/// "categories": {str: real}}. Lookups for uncached samples raise
/// IntegrityError.
class ReplayScoreProvider : public ScoreProvider {
public:
    ReplayScoreProvider(Provider provider, const std::string& cache_path);

    Provider provider() const override { return provider_; }
    std::map<std::string, double> categories(const std::string& sample_id) const override;

private:
    Provider provider_;
    std::map<std::string, std::map<std::string, double>> cache_;
};

// ---------------------------------------------------------------------------
// Report assembly.
// ---------------------------------------------------------------------------

/// Anything that scores a sample with a toxicity probability.
class ProbabilityScorer {
public:
    virtual ~ProbabilityScorer() = default;
    virtual std::string name() const = 0;
    virtual double score(const corpus::Sample& sample) const = 0;
};

class LexiconScorer : public ProbabilityScorer {
public:
    LexiconScorer(Lexicon lexicon, std::string name = "lexicon");
    std::string name() const override { return name_; }
    double score(const corpus::Sample& sample) const override;

private:
    Lexicon lexicon_;
    std::string name_;
};

class ProviderScorer : public ProbabilityScorer {
public:
    ProviderScorer(const ScoreProvider& provider, std::string name);
    std::string name() const override { return name_; }
    double score(const corpus::Sample& sample) const override;

private:
    const ScoreProvider* provider_;
    std::string name_;
};

struct KsComparison {
    std::string model_a;
    std::string model_b;
    double d = 0.0;
    double p_value = 1.0;
    bool significant = false; // p <= alpha
};

struct EvalReport {
    std::string model_name;
    std::string dataset;
    std::size_t n = 0;
    double threshold = 0.5;
    double toxic_f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    std::optional<double> fpr;
    ConfusionCounts counts;
    std::vector<KsComparison> ks_results;
    std::optional<std::size_t> training_size;
    // Which probability samples feed the KS test is an assumption; it is
    // recorded here rather than left implicit.
    std::string ks_note = "KS compares test-set predicted probabilities of the two models";
};

inline constexpr double kSignificanceAlpha = 0.05;

EvalReport evaluate(const ProbabilityScorer& model, const corpus::DatasetSplit& test,
                    const std::vector<const ProbabilityScorer*>& baselines = {},
                    double threshold = 0.5, double alpha = kSignificanceAlpha);

std::vector<PredictionRecord> score_split(const ProbabilityScorer& model,
                                          const corpus::DatasetSplit& test, double threshold);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
void write_report(const std::string& path, const EvalReport& report);
EvalReport load_report(const std::string& path);

} // namespace contextox::evaluation
