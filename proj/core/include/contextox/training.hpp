#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "contextox/corpus.hpp"
#include "contextox/models.hpp"

namespace contextox::training {

struct TrainConfig {
    int batch_size = 32;
    int patience_epochs = 3;
    int max_epochs = 20;
    double learning_rate = 1e-3; // toy default; 2e-5 is usual for pretrained fine-tuning
    double weight_decay = 0.01;
    double positive_class_weight = 1.0; // imbalance knob; augmentation is the intended fix
    std::uint64_t seed = 0;

    void validate() const;
};

struct EpochStats {
    double train_loss = 0.0;
    double valid_loss = 0.0;
    double valid_toxic_f1 = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = 0; // 1-based; minimizes validation loss
};

inline constexpr double kProbabilityEpsilon = 1e-7;

/// Mean binary cross-entropy; probabilities are clamped to
/// [eps, 1-eps] before the logs. Length mismatch raises IntegrityError.
double bce_loss(const std::vector<double>& probabilities, const std::vector<int>& labels,
                double positive_class_weight = 1.0);

/// Stop after `patience` consecutive epochs without a new best validation
/// loss; epochs are 1-based.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience);

    /// Returns true when this epoch improved on the best loss.
    bool observe(int epoch, double valid_loss);
    bool should_stop(int epoch) const { return epoch - best_epoch_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }

private:
    int patience_;
    int best_epoch_ = 0;
    double best_loss_ = 0.0;
    bool has_best_ = false;
};

/// Minimizes BCE with AdamW and early stopping on validation loss; the
/// weights from the best epoch are restored before returning. Fixed seed and
/// data order give bitwise-identical histories. A non-finite loss raises
/// TrainingDivergedError with (epoch, batch).
TrainHistory train(models::ContextClassifier& model, const corpus::DatasetSplit& train_split,
                   const corpus::DatasetSplit& valid_split, const TrainConfig& config);

std::string history_to_json(const TrainHistory& history);
TrainHistory history_from_json(const std::string& text);

} // namespace contextox::training
