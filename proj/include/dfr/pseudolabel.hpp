#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dfr/matrix.hpp"
#include "dfr/network.hpp"

namespace dfr {

// Per-class mean of network outputs over the labeled source set.
struct ClassCenters {
    Matrix centers;                   // C x C, one row per class
    std::vector<std::size_t> counts;  // samples per class
};

struct PseudoLabelSet {
    std::vector<std::size_t> indices;       // unique, sorted target-sample indices
    std::vector<int> labels;                // assigned class per index
    std::vector<double> max_prob;           // winning softmax probability
    std::vector<std::size_t> nearest;       // nearest source center per index
    double threshold_used = 0.0;

    std::size_t size() const { return indices.size(); }
    bool empty() const { return indices.empty(); }
};

// Decreasing confidence thresholds for the easy-to-hard refinement rounds.
struct RefinementSchedule {
    std::size_t rounds = 3;
    std::vector<double> thresholds{0.9, 0.6, 0.3};

    void validate() const;  // throws ConfigError
};

ClassCenters compute_class_centers(const Matrix& source_logits, const std::vector<int>& labels,
                                   std::size_t num_classes);

struct NearestCenter {
    std::size_t index = 0;             // argmin, ties toward the lowest class
    std::vector<double> distances;     // L1 distance to each center
};
NearestCenter nearest_center(std::span<const double> logits_row, const ClassCenters& centers);

// A sample is admitted iff its max softmax probability strictly exceeds
// p_t and its nearest source center agrees with the argmax class.
PseudoLabelSet select_pseudo_labels(const Matrix& target_logits, const ClassCenters& centers,
                                    double p_t);

struct TargetLossResult {
    double loss = 0.0;
    Gradients grads;
    bool skipped = false;  // empty selection: the caller omits this term
};

// Mean cross-entropy of the network over the selected target samples
// against their pseudo labels, processed in batches of `batch`.
TargetLossResult target_loss(NetworkParams& params, const PseudoLabelSet& selected,
                             const Matrix& target_features, std::size_t batch);

}  // namespace dfr
