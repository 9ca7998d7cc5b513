#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfr/dataset.hpp"
#include "dfr/network.hpp"
#include "dfr/pseudolabel.hpp"
#include "dfr/registration.hpp"

namespace dfr {

enum class HistActivations { kLogits, kEmbedding };

struct TrainConfig {
    double alpha = 0.6;   // registration balance factor
    double beta = 0.01;   // histogram loss weight
    std::size_t rounds = 3;
    std::vector<double> thresholds{0.9, 0.6, 0.3};
    std::size_t epochs = 210;
    std::size_t batch_size = 64;
    double learning_rate = 0.001;
    std::size_t bins = 10;
    std::uint64_t seed = 0;
    RegistrationConfig registration;  // alpha here is overridden by the field above

    bool enable_registration = true;
    bool enable_histogram = true;
    bool enable_pseudo = true;
    HistActivations hist_activations = HistActivations::kLogits;

    void validate() const;  // throws ConfigError
};

struct EpochRecord {
    std::size_t epoch = 0;
    double l_r = 0.0;
    double l_s = 0.0;
    double l_h = 0.0;
    double l_t = 0.0;
    std::size_t n_pt = 0;
    double target_accuracy = 0.0;  // NaN when the target is unlabeled
    double mmd = 0.0;
    double coral = 0.0;
    double seconds = 0.0;
};

// Selection statistics for one refinement round; precision is NaN when
// the target set carries no labels.
struct RoundStats {
    std::size_t round = 0;
    std::size_t start_epoch = 0;
    double threshold = 0.0;
    std::size_t n_pt = 0;
    double precision = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::vector<RoundStats> rounds;
};

struct TrainResult {
    NetworkParams params;
    TrainHistory history;
};

// Joint training: per batch pair, feature registration, source
// classification on the registered batch, weighted histogram matching,
// and (within refinement phases) the pseudo-labeled target loss, all
// stepped through one Adam optimizer. Deterministic in cfg.seed.
TrainResult train(const TrainConfig& cfg, const DomainDataset& source, const DomainDataset& target);

struct Evaluation {
    double accuracy = 0.0;
    std::vector<double> per_class;  // NaN for classes absent from the dataset
};
Evaluation evaluate(const NetworkParams& params, const DomainDataset& dataset);

struct AblationRow {
    std::string variant;
    double accuracy = 0.0;
};

// The eight loss-toggle combinations, one row each, shared seed. The
// variant name lists the removed components (R: registration,
// H: histogram matching, T: pseudo-labeled target loss).
std::vector<AblationRow> ablation_suite(const TrainConfig& cfg, const DomainDataset& source,
                                        const DomainDataset& target);

extern const std::vector<std::string> kAblationVariants;

}  // namespace dfr
