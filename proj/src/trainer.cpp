#include "dfr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "dfr/adam.hpp"
#include "dfr/errors.hpp"
#include "dfr/histmatch.hpp"
#include "dfr/rng.hpp"

namespace dfr {
namespace {

constexpr std::size_t kEvalChunk = 2048;
constexpr double kReadoutBandwidth = 1.0;

// Shuffled index stream that yields full batches only; when fewer than a
// batch remain it reshuffles and starts over (trailing remainder dropped).
class BatchStream {
public:
    BatchStream(std::size_t n, Rng* rng) : order_(n), rng_(rng) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        reshuffle();
    }

    void reshuffle() {
        rng_->shuffle(order_);
        cursor_ = 0;
    }

    std::vector<std::size_t> next(std::size_t k) {
        if (cursor_ + k > order_.size()) reshuffle();
        std::vector<std::size_t> out(order_.begin() + cursor_, order_.begin() + cursor_ + k);
        cursor_ += k;
        return out;
    }

private:
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    Rng* rng_;
};

struct NetworkAdam {
    AdamState w1, b1, gamma1, shift1, w2, b2, gamma2, shift2, w3, b3;

    explicit NetworkAdam(const NetworkParams& p)
        : w1(p.w1), b1(p.b1), gamma1(p.gamma1), shift1(p.shift1), w2(p.w2), b2(p.b2),
          gamma2(p.gamma2), shift2(p.shift2), w3(p.w3), b3(p.b3) {}

    void step(NetworkParams& p, const Gradients& g, double lr) {
        adam_step(p.w1, g.w1, w1, lr, "w1");
        adam_step(p.b1, g.b1, b1, lr, "b1");
        adam_step(p.gamma1, g.gamma1, gamma1, lr, "gamma1");
        adam_step(p.shift1, g.shift1, shift1, lr, "shift1");
        adam_step(p.w2, g.w2, w2, lr, "w2");
        adam_step(p.b2, g.b2, b2, lr, "b2");
        adam_step(p.gamma2, g.gamma2, gamma2, lr, "gamma2");
        adam_step(p.shift2, g.shift2, shift2, lr, "shift2");
        adam_step(p.w3, g.w3, w3, lr, "w3");
        adam_step(p.b3, g.b3, b3, lr, "b3");
    }
};

void accumulate(Gradients& into, const Gradients& g) {
    add_inplace(into.w1, g.w1), add_inplace(into.b1, g.b1);
    add_inplace(into.gamma1, g.gamma1), add_inplace(into.shift1, g.shift1);
    add_inplace(into.w2, g.w2), add_inplace(into.b2, g.b2);
    add_inplace(into.gamma2, g.gamma2), add_inplace(into.shift2, g.shift2);
    add_inplace(into.w3, g.w3), add_inplace(into.b3, g.b3);
}

Matrix eval_logits(const NetworkParams& params, const Matrix& features) {
    Matrix logits(features.rows(), params.num_classes);
    for (std::size_t pos = 0; pos < features.rows(); pos += kEvalChunk) {
        const std::size_t k = std::min(kEvalChunk, features.rows() - pos);
        std::vector<std::size_t> rows(k);
        std::iota(rows.begin(), rows.end(), pos);
        const Matrix chunk_logits = forward_eval(params, features.select_rows(rows));
        for (std::size_t i = 0; i < k; ++i) {
            const double* src = chunk_logits.row(i);
            double* dst = logits.row(pos + i);
            std::copy(src, src + logits.cols(), dst);
        }
    }
    return logits;
}

std::size_t phase_of(std::size_t epoch, std::size_t epochs, std::size_t rounds) {
    if (epochs == 0) return 0;
    return std::min(rounds - 1, epoch * rounds / epochs);
}

// Batch subset of the current selection, sorted by target index.
PseudoLabelSet subset_by_positions(const PseudoLabelSet& sel, std::vector<std::size_t> positions) {
    std::sort(positions.begin(), positions.end(),
              [&](std::size_t a, std::size_t b) { return sel.indices[a] < sel.indices[b]; });
    PseudoLabelSet out;
    out.threshold_used = sel.threshold_used;
    for (std::size_t p : positions) {
        out.indices.push_back(sel.indices[p]);
        out.labels.push_back(sel.labels[p]);
        out.max_prob.push_back(sel.max_prob[p]);
        out.nearest.push_back(sel.nearest[p]);
    }
    return out;
}

}  // namespace

const std::vector<std::string> kAblationVariants = {
    "DFR-H/T/R", "DFR-R/T", "DFR-H/R", "DFR-H/T", "DFR-R", "DFR-T", "DFR-H", "DFR",
};

void TrainConfig::validate() const {
    if (alpha < 0.0) throw ConfigError("config: alpha must be >= 0");
    if (beta < 0.0) throw ConfigError("config: beta must be >= 0");
    if (batch_size < 2) throw ConfigError("config: batch_size must be >= 2");
    if (!(learning_rate > 0.0)) throw ConfigError("config: learning_rate must be positive");
    if (bins < 2) throw ConfigError("config: bins must be >= 2");
    RefinementSchedule{rounds, thresholds}.validate();
    if (registration.inner_steps < 1) throw ConfigError("config: reg_steps must be >= 1");
    if (!(registration.inner_lr > 0.0)) throw ConfigError("config: reg_lr must be positive");
    if (registration.tolerance < 0.0) throw ConfigError("config: reg_tolerance must be >= 0");
}

TrainResult train(const TrainConfig& cfg, const DomainDataset& source,
                  const DomainDataset& target) {
    cfg.validate();
    if (!source.labeled()) throw ConfigError("train: source dataset must be labeled");
    if (source.size() == 0 || target.size() == 0) throw DataError("train: empty dataset");
    if (source.dim() != target.dim()) {
        throw ConfigError("train: source width " + std::to_string(source.dim()) +
                          " does not match target width " + std::to_string(target.dim()));
    }
    const std::size_t num_classes = source.num_classes();
    if (num_classes < 2) throw ConfigError("train: need at least 2 classes");
    {
        std::vector<std::size_t> counts(num_classes, 0);
        for (int l : *source.labels) counts[static_cast<std::size_t>(l)] += 1;
        for (std::size_t c = 0; c < num_classes; ++c) {
            if (counts[c] == 0) {
                throw ConfigError("train: class " + std::to_string(c) + " missing from source");
            }
        }
    }
    if (target.labeled()) {
        for (int l : *target.labels) {
            if (l < 0 || static_cast<std::size_t>(l) >= num_classes) {
                throw DataError("train: target label " + std::to_string(l) + " out of range");
            }
        }
    }
    if (cfg.batch_size > std::min(source.size(), target.size())) {
        throw ConfigError("train: batch_size exceeds the smaller domain size");
    }

    TrainResult result;
    result.params = init_params(source.dim(), num_classes, cfg.seed);
    if (cfg.epochs == 0) return result;

    NetworkParams& params = result.params;
    NetworkAdam adam(params);
    Rng run_rng(cfg.seed ^ 0xD1B54A32D192ED03ULL);
    BatchStream source_stream(source.size(), &run_rng);
    BatchStream target_stream(target.size(), &run_rng);

    RegistrationConfig reg_cfg = cfg.registration;
    reg_cfg.alpha = cfg.alpha;
    HistogramConfig hist_cfg;
    hist_cfg.bins = cfg.bins;
    // Zero weight and a disabled toggle are the same thing: no histogram
    // branch at all, so the two configurations train bit-identically.
    const bool hist_active = cfg.enable_histogram && cfg.beta != 0.0;

    const std::size_t pairs_per_epoch =
        std::max(source.size(), target.size()) / cfg.batch_size;

    PseudoLabelSet selection;
    std::unique_ptr<BatchStream> pool_stream;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t_start = std::chrono::steady_clock::now();

        if (cfg.enable_pseudo &&
            (epoch == 0 || phase_of(epoch, cfg.epochs, cfg.rounds) !=
                               phase_of(epoch - 1, cfg.epochs, cfg.rounds))) {
            const std::size_t round = phase_of(epoch, cfg.epochs, cfg.rounds);
            const Matrix src_logits = eval_logits(params, source.features);
            const ClassCenters centers = compute_class_centers(src_logits, *source.labels, num_classes);
            const Matrix tgt_logits = eval_logits(params, target.features);
            selection = select_pseudo_labels(tgt_logits, centers, cfg.thresholds[round]);
            pool_stream = selection.empty()
                              ? nullptr
                              : std::make_unique<BatchStream>(selection.size(), &run_rng);

            RoundStats stats;
            stats.round = round + 1;
            stats.start_epoch = epoch + 1;
            stats.threshold = cfg.thresholds[round];
            stats.n_pt = selection.size();
            stats.precision = std::numeric_limits<double>::quiet_NaN();
            if (target.labeled() && !selection.empty()) {
                std::size_t correct = 0;
                for (std::size_t k = 0; k < selection.size(); ++k) {
                    if (selection.labels[k] == (*target.labels)[selection.indices[k]]) ++correct;
                }
                stats.precision = static_cast<double>(correct) / static_cast<double>(selection.size());
            }
            result.history.rounds.push_back(stats);
        }

        source_stream.reshuffle();
        target_stream.reshuffle();
        if (pool_stream) pool_stream->reshuffle();

        double sum_l_r = 0.0, sum_l_s = 0.0, sum_l_h = 0.0, sum_l_t = 0.0;
        Matrix last_s, last_t;
        for (std::size_t b = 0; b < pairs_per_epoch; ++b) {
            const std::vector<std::size_t> sidx = source_stream.next(cfg.batch_size);
            const std::vector<std::size_t> tidx = target_stream.next(cfg.batch_size);
            const Matrix s_batch = source.features.select_rows(sidx);
            const Matrix t_batch = target.features.select_rows(tidx);
            std::vector<int> y(cfg.batch_size);
            for (std::size_t i = 0; i < sidx.size(); ++i) y[i] = (*source.labels)[sidx[i]];

            Matrix registered = s_batch;
            if (cfg.enable_registration) {
                RegistrationResult reg = register_features(s_batch, t_batch, reg_cfg);
                sum_l_r += reg.final_loss;
                registered = std::move(reg.registered);
            }

            // Source classification on the (detached) registered batch.
            ForwardCache cache_s;
            const Matrix logits_s = forward(params, registered, Mode::kTrain, &cache_s);
            CrossEntropyResult ce = cross_entropy(logits_s, y);
            sum_l_s += ce.loss;

            Gradients grads;
            if (hist_active) {
                ForwardCache cache_t;
                const Matrix logits_t = forward(params, t_batch, Mode::kTrain, &cache_t);
                if (cfg.hist_activations == HistActivations::kLogits) {
                    HistogramLossResult hl = histogram_loss(logits_s, logits_t, hist_cfg);
                    sum_l_h += hl.loss;
                    axpy_inplace(ce.dlogits, cfg.beta, hl.d_reg);
                    grads = backward(params, cache_s, ce.dlogits);
                    scale_inplace(hl.d_tgt, cfg.beta);
                    accumulate(grads, backward(params, cache_t, hl.d_tgt));
                } else {
                    HistogramLossResult hl = histogram_loss(cache_s.h2, cache_t.h2, hist_cfg);
                    sum_l_h += hl.loss;
                    scale_inplace(hl.d_reg, cfg.beta);
                    grads = backward(params, cache_s, ce.dlogits, &hl.d_reg);
                    scale_inplace(hl.d_tgt, cfg.beta);
                    const Matrix zero_dlogits(cfg.batch_size, num_classes);
                    accumulate(grads, backward(params, cache_t, zero_dlogits, &hl.d_tgt));
                }
            } else {
                grads = backward(params, cache_s, ce.dlogits);
            }

            if (cfg.enable_pseudo && !selection.empty()) {
                const std::size_t k = std::min(cfg.batch_size, selection.size());
                const PseudoLabelSet batch_sel = subset_by_positions(selection, pool_stream->next(k));
                const TargetLossResult tl = target_loss(params, batch_sel, target.features, k);
                sum_l_t += tl.loss;
                accumulate(grads, tl.grads);
            }

            adam.step(params, grads, cfg.learning_rate);

            if (b + 1 == pairs_per_epoch) {
                last_s = s_batch;
                last_t = t_batch;
            }
        }

        EpochRecord rec;
        rec.epoch = epoch + 1;
        const double inv_pairs = 1.0 / static_cast<double>(pairs_per_epoch);
        rec.l_r = sum_l_r * inv_pairs;
        rec.l_s = sum_l_s * inv_pairs;
        rec.l_t = sum_l_t * inv_pairs;
        rec.n_pt = cfg.enable_pseudo ? selection.size() : 0;

        // Discrepancy readout on the epoch's last batch pair (eval mode).
        const Matrix ro_s = eval_logits(params, last_s);
        const Matrix ro_t = eval_logits(params, last_t);
        rec.l_h = hist_active ? sum_l_h * inv_pairs : histogram_loss(ro_s, ro_t, hist_cfg).loss;
        rec.mmd = mmd_value(ro_s, ro_t, kReadoutBandwidth);
        rec.coral = coral_value(ro_s, ro_t);

        rec.target_accuracy = target.labeled() ? evaluate(params, target).accuracy
                                               : std::numeric_limits<double>::quiet_NaN();
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        result.history.epochs.push_back(rec);
    }
    return result;
}

Evaluation evaluate(const NetworkParams& params, const DomainDataset& dataset) {
    if (!dataset.labeled()) throw DataError("evaluate: dataset '" + dataset.name + "' is unlabeled");
    if (dataset.size() == 0) throw DataError("evaluate: empty dataset");

    const std::size_t num_classes = params.num_classes;
    const Matrix logits = eval_logits(params, dataset.features);
    std::vector<std::size_t> correct(num_classes, 0), total(num_classes, 0);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const int label = (*dataset.labels)[i];
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
            throw DataError("evaluate: label " + std::to_string(label) + " out of range at row " +
                            std::to_string(i));
        }
        const double* row = logits.row(i);
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < num_classes; ++j) {
            if (row[j] > row[argmax]) argmax = j;
        }
        total[static_cast<std::size_t>(label)] += 1;
        if (argmax == static_cast<std::size_t>(label)) {
            correct[static_cast<std::size_t>(label)] += 1;
            ++hits;
        }
    }

    Evaluation ev;
    ev.accuracy = static_cast<double>(hits) / static_cast<double>(logits.rows());
    ev.per_class.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        ev.per_class[c] = total[c] == 0 ? std::numeric_limits<double>::quiet_NaN()
                                        : static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    }
    return ev;
}

std::vector<AblationRow> ablation_suite(const TrainConfig& cfg, const DomainDataset& source,
                                        const DomainDataset& target) {
    if (!target.labeled()) throw DataError("ablation: target labels required to score variants");

    struct Toggle {
        const char* name;
        bool r, h, t;
    };
    static const Toggle kToggles[] = {
        {"DFR-H/T/R", false, false, false}, {"DFR-R/T", false, true, false},
        {"DFR-H/R", false, false, true},    {"DFR-H/T", true, false, false},
        {"DFR-R", false, true, true},       {"DFR-T", true, true, false},
        {"DFR-H", true, false, true},       {"DFR", true, true, true},
    };

    std::vector<AblationRow> rows;
    for (const Toggle& t : kToggles) {
        TrainConfig variant = cfg;
        variant.enable_registration = t.r;
        variant.enable_histogram = t.h;
        variant.enable_pseudo = t.t;
        const TrainResult res = train(variant, source, target);
        rows.push_back({t.name, evaluate(res.params, target).accuracy});
    }
    return rows;
}

}  // namespace dfr
