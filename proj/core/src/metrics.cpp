#include <cmath>

#include "contextox/errors.hpp"
#include "contextox/evaluation.hpp"

namespace contextox::evaluation {

PredictionRecord make_record(std::string sample_id, double probability, int gold,
                             double threshold) {
    PredictionRecord r;
    r.sample_id = std::move(sample_id);
    r.probability = probability;
    r.predicted = probability >= threshold ? 1 : 0;
    r.gold = gold;
    return r;
}

ConfusionCounts confusion(const std::vector<PredictionRecord>& records) {
    ConfusionCounts c;
    for (const PredictionRecord& r : records) {
        if (r.gold == 1) {
            (r.predicted == 1 ? c.tp : c.fn) += 1;
        } else {
            (r.predicted == 1 ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

double precision_toxic(const std::vector<PredictionRecord>& records) {
    const ConfusionCounts c = confusion(records);
    const long denom = c.tp + c.fp;
    return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double recall_toxic(const std::vector<PredictionRecord>& records) {
    const ConfusionCounts c = confusion(records);
    const long denom = c.tp + c.fn;
    return denom == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(denom);
}

double f1_toxic(const std::vector<PredictionRecord>& records) {
    const double p = precision_toxic(records);
    const double r = recall_toxic(records);
    return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

std::optional<double> fpr(const std::vector<PredictionRecord>& records) {
    const ConfusionCounts c = confusion(records);
    const long denom = c.fp + c.tn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.fp) / static_cast<double>(denom);
}

} // namespace contextox::evaluation
