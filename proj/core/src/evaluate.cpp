#include <fstream>

#include <json.hpp>

#include "contextox/errors.hpp"
#include "contextox/evaluation.hpp"

namespace contextox::evaluation {

using nlohmann::json;

LexiconScorer::LexiconScorer(Lexicon lexicon, std::string name)
    : lexicon_(std::move(lexicon)), name_(std::move(name)) {}

double LexiconScorer::score(const corpus::Sample& sample) const {
    // Degenerate probabilities by construction: 0 or 1.
    return static_cast<double>(lexicon_classify(sample.target.norm_text, lexicon_));
}

ProviderScorer::ProviderScorer(const ScoreProvider& provider, std::string name)
    : provider_(&provider), name_(std::move(name)) {}

double ProviderScorer::score(const corpus::Sample& sample) const {
    return map_api_scores(provider_->provider(), provider_->categories(sample.sample_id));
}

std::vector<PredictionRecord> score_split(const ProbabilityScorer& model,
                                          const corpus::DatasetSplit& test, double threshold) {
    std::vector<PredictionRecord> records;
    records.reserve(test.samples.size());
    for (const corpus::Sample& s : test.samples) {
        records.push_back(make_record(s.sample_id, model.score(s), s.label, threshold));
    }
    return records;
}

EvalReport evaluate(const ProbabilityScorer& model, const corpus::DatasetSplit& test,
                    const std::vector<const ProbabilityScorer*>& baselines, double threshold,
                    double alpha) {
    if (test.samples.empty()) throw ConfigError("evaluate requires a non-empty test split");
    const std::vector<PredictionRecord> records = score_split(model, test, threshold);

    EvalReport report;
    report.model_name = model.name();
    report.n = records.size();
    report.threshold = threshold;
    report.toxic_f1 = f1_toxic(records);
    report.precision = precision_toxic(records);
    report.recall = recall_toxic(records);
    report.fpr = fpr(records);
    report.counts = confusion(records);

    std::vector<double> probs;
    probs.reserve(records.size());
    for (const PredictionRecord& r : records) probs.push_back(r.probability);

    for (const ProbabilityScorer* baseline : baselines) {
        std::vector<double> base_probs;
        base_probs.reserve(test.samples.size());
        for (const corpus::Sample& s : test.samples) base_probs.push_back(baseline->score(s));
        const KsResult ks = ks_2sample(probs, base_probs);
        KsComparison cmp;
        cmp.model_a = model.name();
        cmp.model_b = baseline->name();
        cmp.d = ks.d;
        cmp.p_value = ks.p_value;
        cmp.significant = ks.p_value <= alpha;
        report.ks_results.push_back(std::move(cmp));
    }
    return report;
}

std::string report_to_json(const EvalReport& report) {
    json j;
    j["model"] = report.model_name;
    j["dataset"] = report.dataset;
    j["n"] = report.n;
    j["threshold"] = report.threshold;
    j["metrics"]["toxic_f1"] = report.toxic_f1;
    j["metrics"]["precision"] = report.precision;
    j["metrics"]["recall"] = report.recall;
    j["metrics"]["fpr"] = report.fpr ? json(*report.fpr) : json(nullptr);
    j["metrics"]["confusion"] = {{"tp", report.counts.tp},
                                 {"fp", report.counts.fp},
                                 {"tn", report.counts.tn},
                                 {"fn", report.counts.fn}};
    json ks = json::array();
    for (const KsComparison& c : report.ks_results) {
        ks.push_back({{"model_a", c.model_a},
                      {"model_b", c.model_b},
                      {"d", c.d},
                      {"p_value", c.p_value},
                      {"significant", c.significant}});
    }
    j["ks"] = ks;
    if (report.training_size) j["training_size"] = *report.training_size;
    j["notes"]["ks_samples"] = report.ks_note;
    return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("invalid report JSON: ") + e.what());
    }
    EvalReport report;
    report.model_name = j.value("model", "");
    report.dataset = j.value("dataset", "");
    report.n = j.value("n", static_cast<std::size_t>(0));
    report.threshold = j.value("threshold", 0.5);
    const json& m = j.at("metrics");
    report.toxic_f1 = m.value("toxic_f1", 0.0);
    report.precision = m.value("precision", 0.0);
    report.recall = m.value("recall", 0.0);
    if (m.contains("fpr") && !m.at("fpr").is_null()) report.fpr = m.at("fpr").get<double>();
    if (m.contains("confusion")) {
        const json& c = m.at("confusion");
        report.counts.tp = c.value("tp", 0L);
        report.counts.fp = c.value("fp", 0L);
        report.counts.tn = c.value("tn", 0L);
        report.counts.fn = c.value("fn", 0L);
    }
    if (j.contains("ks")) {
        for (const json& c : j.at("ks")) {
            KsComparison cmp;
            cmp.model_a = c.value("model_a", "");
            cmp.model_b = c.value("model_b", "");
            cmp.d = c.value("d", 0.0);
            cmp.p_value = c.value("p_value", 1.0);
            cmp.significant = c.value("significant", false);
            report.ks_results.push_back(std::move(cmp));
        }
    }
    if (j.contains("training_size") && !j.at("training_size").is_null()) {
        report.training_size = j.at("training_size").get<std::size_t>();
    }
    if (j.contains("notes") && j.at("notes").contains("ks_samples")) {
        report.ks_note = j.at("notes").at("ks_samples").get<std::string>();
    }
    return report;
}

void write_report(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write report: " + path);
    out << report_to_json(report) << '\n';
}

EvalReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open report: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return report_from_json(text);
}

} // namespace contextox::evaluation
