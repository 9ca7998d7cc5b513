#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "dfr/dataset.hpp"
#include "dfr/trainer.hpp"

namespace dfr {

// UTF-8 CSV feature files: header `label,f0,...,f{d-1}` or `f0,...,f{d-1}`,
// one sample per row, 17 significant digits on write (lossless doubles).
DomainDataset load_features(const std::string& path);
void save_features(const DomainDataset& dataset, const std::string& path);

// Gaussian-mixture benchmark with an affine covariate shift between the
// two domains (rotation in a random 2-plane, uniform scale, translation).
struct SyntheticSpec {
    std::size_t classes = 4;
    std::size_t dim = 16;
    std::size_t per_class = 500;   // samples per class per domain
    double separation = 0.4;       // RMS distance between class means
    double covariance = 0.1;       // per-coordinate sample noise
    double shift_translation = 0.1;
    double shift_rotation_deg = 25.0;
    double shift_scale = 1.1;
    double label_noise = 0.0;      // fraction of source labels flipped
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

std::pair<DomainDataset, DomainDataset> generate_synthetic(const SyntheticSpec& spec);

// Flat `key = value` files; '#' starts a comment; unknown keys are errors.
SyntheticSpec load_synthetic_spec(const std::string& path);
TrainConfig load_train_config(const std::string& path);

// One CSV row per epoch:
// epoch,L_R,L_S,L_H,L_T,n_pt,target_accuracy,mmd,coral,seconds
void write_metrics(const TrainHistory& history, const std::string& path);
void write_ablation(const std::vector<AblationRow>& rows, const std::string& path);

}  // namespace dfr
