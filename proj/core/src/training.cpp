#include "contextox/training.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "contextox/errors.hpp"
#include "contextox/evaluation.hpp"
#include "contextox/nn/optimizer.hpp"
#include "contextox/rng.hpp"

namespace contextox::training {

using nlohmann::json;

void TrainConfig::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience_epochs < 1) throw ConfigError("patience_epochs must be >= 1");
    if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (positive_class_weight <= 0.0) throw ConfigError("positive_class_weight must be positive");
}

double bce_loss(const std::vector<double>& probabilities, const std::vector<int>& labels,
                double positive_class_weight) {
    if (probabilities.size() != labels.size()) {
        throw IntegrityError("bce_loss length mismatch: " + std::to_string(probabilities.size()) +
                             " probabilities vs " + std::to_string(labels.size()) + " labels");
    }
    if (probabilities.empty()) throw IntegrityError("bce_loss requires at least one prediction");
    double total = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p =
            std::min(1.0 - kProbabilityEpsilon, std::max(kProbabilityEpsilon, probabilities[i]));
        const int y = labels[i];
        const double w = y == 1 ? positive_class_weight : 1.0;
        total += -w * (y == 1 ? std::log(p) : std::log(1.0 - p));
    }
    return total / static_cast<double>(probabilities.size());
}

EarlyStopper::EarlyStopper(int patience) : patience_(patience) {
    if (patience < 1) throw ConfigError("early-stopping patience must be >= 1");
}

bool EarlyStopper::observe(int epoch, double valid_loss) {
    if (!has_best_ || valid_loss < best_loss_) {
        has_best_ = true;
        best_loss_ = valid_loss;
        best_epoch_ = epoch;
        return true;
    }
    return false;
}

namespace {

/// Tape-path weighted BCE over a batch; arithmetic mirrors bce_loss.
nn::Var batch_bce(nn::Graph& g, nn::Var probs, const std::vector<int>& labels, double pos_weight) {
    const auto n = static_cast<long>(labels.size());
    nn::Matrix wy(n, 1);  // y-weighted positive mask
    nn::Matrix wny(n, 1); // negative mask
    for (long i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        wy(i, 0) = y == 1 ? pos_weight : 0.0;
        wny(i, 0) = y == 1 ? 0.0 : 1.0;
    }
    nn::Var pc = g.clamp(probs, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
    nn::Var pos_term = g.cmul_const(g.log(pc), wy);
    nn::Var neg_term = g.cmul_const(g.log(g.affine(pc, -1.0, 1.0)), wny);
    return g.scale(g.sum_all(g.add(pos_term, neg_term)), -1.0 / static_cast<double>(n));
}

EpochStats validate_epoch(const models::ContextClassifier& model,
                          const corpus::DatasetSplit& valid_split, EpochStats stats) {
    std::vector<double> probs;
    std::vector<int> labels;
    std::vector<evaluation::PredictionRecord> records;
    probs.reserve(valid_split.samples.size());
    for (const corpus::Sample& s : valid_split.samples) {
        const double p = model.predict(s);
        probs.push_back(p);
        labels.push_back(s.label);
        records.push_back(evaluation::make_record(s.sample_id, p, s.label, model.spec().threshold));
    }
    stats.valid_loss = bce_loss(probs, labels);
    stats.valid_toxic_f1 = evaluation::f1_toxic(records);
    return stats;
}

} // namespace

TrainHistory train(models::ContextClassifier& model, const corpus::DatasetSplit& train_split,
                   const corpus::DatasetSplit& valid_split, const TrainConfig& config) {
    config.validate();
    if (train_split.samples.empty() || valid_split.samples.empty()) {
        throw ConfigError("train and valid splits must be non-empty");
    }

    std::vector<nn::Parameter*> params = model.trainable_parameters();
    nn::AdamWConfig opt_cfg;
    opt_cfg.learning_rate = config.learning_rate;
    opt_cfg.weight_decay = config.weight_decay;
    nn::AdamW optimizer(params, opt_cfg);
    for (nn::Parameter* p : params) p->zero_grad();

    TrainHistory history;
    EarlyStopper stopper(config.patience_epochs);
    std::vector<nn::Matrix> best_values;

    std::vector<std::size_t> order(train_split.samples.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(config.seed, 0x1000 + static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t seen = 0;
        int batch_index = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size), ++batch_index) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            nn::Graph g;
            std::vector<nn::Var> probs;
            std::vector<int> labels;
            for (std::size_t k = start; k < end; ++k) {
                const corpus::Sample& s = train_split.samples[order[k]];
                probs.push_back(model.predict_var(g, s));
                labels.push_back(s.label);
            }
            nn::Var loss =
                batch_bce(g, g.concat_rows(probs), labels, config.positive_class_weight);
            const double loss_value = g.value(loss)(0, 0);
            if (!std::isfinite(loss_value)) {
                throw TrainingDivergedError("non-finite training loss", epoch, batch_index);
            }
            g.backward(loss);
            optimizer.step();
            loss_sum += loss_value * static_cast<double>(end - start);
            seen += end - start;
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(seen);
        stats = validate_epoch(model, valid_split, stats);
        history.epochs.push_back(stats);

        if (stopper.observe(epoch, stats.valid_loss)) {
            best_values.clear();
            best_values.reserve(params.size());
            for (const nn::Parameter* p : params) best_values.push_back(p->value);
        }
        if (stopper.should_stop(epoch)) break;
    }

    // Hand back the weights of the best epoch, never a worse tail epoch.
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
    history.best_epoch = stopper.best_epoch();
    return history;
}

std::string history_to_json(const TrainHistory& history) {
    json j;
    j["best_epoch"] = history.best_epoch;
    json epochs = json::array();
    for (const EpochStats& e : history.epochs) {
        epochs.push_back({{"train_loss", e.train_loss},
                          {"valid_loss", e.valid_loss},
                          {"valid_toxic_f1", e.valid_toxic_f1}});
    }
    j["epochs"] = epochs;
    return j.dump(2);
}

TrainHistory history_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("invalid history JSON: ") + e.what());
    }
    TrainHistory h;
    h.best_epoch = j.value("best_epoch", 0);
    for (const json& e : j.at("epochs")) {
        EpochStats s;
        s.train_loss = e.value("train_loss", 0.0);
        s.valid_loss = e.value("valid_loss", 0.0);
        s.valid_toxic_f1 = e.value("valid_toxic_f1", 0.0);
        h.epochs.push_back(s);
    }
    return h;
}

} // namespace contextox::training
