#include "dfr/pseudolabel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfr/errors.hpp"

namespace dfr {
namespace {

// Sums parameter gradients; per-chunk input gradients are not kept.
void accumulate(Gradients& into, const Gradients& g) {
    if (into.w1.empty()) {
        into = g;
        into.input = Matrix();
        return;
    }
    add_inplace(into.w1, g.w1), add_inplace(into.b1, g.b1);
    add_inplace(into.gamma1, g.gamma1), add_inplace(into.shift1, g.shift1);
    add_inplace(into.w2, g.w2), add_inplace(into.b2, g.b2);
    add_inplace(into.gamma2, g.gamma2), add_inplace(into.shift2, g.shift2);
    add_inplace(into.w3, g.w3), add_inplace(into.b3, g.b3);
}

}  // namespace

void RefinementSchedule::validate() const {
    if (rounds < 1) throw ConfigError("refinement: need at least 1 round");
    if (thresholds.size() != rounds) {
        throw ConfigError("refinement: " + std::to_string(thresholds.size()) + " thresholds for " +
                          std::to_string(rounds) + " rounds");
    }
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0 && thresholds[i] < 1.0)) {
            throw ConfigError("refinement: threshold " + std::to_string(thresholds[i]) +
                              " outside (0,1)");
        }
        if (i > 0 && !(thresholds[i] < thresholds[i - 1])) {
            throw ConfigError("refinement: thresholds must be strictly decreasing");
        }
    }
}

ClassCenters compute_class_centers(const Matrix& source_logits, const std::vector<int>& labels,
                                   std::size_t num_classes) {
    if (labels.size() != source_logits.rows()) {
        throw ConfigError("class centers: label count does not match logits rows");
    }
    if (source_logits.cols() != num_classes) {
        throw ConfigError("class centers: logits width does not match class count");
    }

    ClassCenters cc;
    cc.centers = Matrix(num_classes, num_classes);
    cc.counts.assign(num_classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw DataError("class centers: label " + std::to_string(labels[i]) +
                            " out of range at row " + std::to_string(i));
        }
        const auto c = static_cast<std::size_t>(labels[i]);
        cc.counts[c] += 1;
        const double* row = source_logits.row(i);
        double* center = cc.centers.row(c);
        for (std::size_t j = 0; j < num_classes; ++j) center[j] += row[j];
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (cc.counts[c] == 0) {
            throw DataError("class centers: class " + std::to_string(c) + " has no source samples");
        }
        double* center = cc.centers.row(c);
        for (std::size_t j = 0; j < num_classes; ++j) center[j] /= static_cast<double>(cc.counts[c]);
    }
    return cc;
}

NearestCenter nearest_center(std::span<const double> logits_row, const ClassCenters& centers) {
    const std::size_t c = centers.centers.rows();
    if (logits_row.size() != centers.centers.cols()) {
        throw ConfigError("nearest_center: row width does not match center width");
    }
    NearestCenter out;
    out.distances.resize(c);
    for (std::size_t k = 0; k < c; ++k) {
        const double* center = centers.centers.row(k);
        double dist = 0.0;
        for (std::size_t j = 0; j < logits_row.size(); ++j) dist += std::abs(logits_row[j] - center[j]);
        out.distances[k] = dist;
        if (dist < out.distances[out.index]) out.index = k;
    }
    return out;
}

PseudoLabelSet select_pseudo_labels(const Matrix& target_logits, const ClassCenters& centers,
                                    double p_t) {
    if (!(p_t > 0.0 && p_t < 1.0)) throw ConfigError("select_pseudo_labels: p_t must be in (0,1)");

    const Matrix probs = softmax(target_logits);
    PseudoLabelSet out;
    out.threshold_used = p_t;
    for (std::size_t i = 0; i < target_logits.rows(); ++i) {
        const double* prow = probs.row(i);
        std::size_t argmax = 0;
        for (std::size_t j = 1; j < probs.cols(); ++j) {
            if (prow[j] > prow[argmax]) argmax = j;
        }
        if (!(prow[argmax] > p_t)) continue;
        const NearestCenter nc =
            nearest_center({target_logits.row(i), target_logits.cols()}, centers);
        if (nc.index != argmax) continue;
        out.indices.push_back(i);
        out.labels.push_back(static_cast<int>(argmax));
        out.max_prob.push_back(prow[argmax]);
        out.nearest.push_back(nc.index);
    }
    return out;
}

TargetLossResult target_loss(NetworkParams& params, const PseudoLabelSet& selected,
                             const Matrix& target_features, std::size_t batch) {
    if (batch < 1) throw ConfigError("target_loss: batch must be >= 1");
    TargetLossResult res;
    if (selected.empty()) {
        res.skipped = true;
        return res;
    }

    const std::size_t n = selected.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t pos = 0; pos < n; pos += batch) {
        const std::size_t k = std::min(batch, n - pos);
        std::vector<std::size_t> rows(selected.indices.begin() + pos,
                                      selected.indices.begin() + pos + k);
        std::vector<int> labels(selected.labels.begin() + pos, selected.labels.begin() + pos + k);
        const Matrix x = target_features.select_rows(rows);

        ForwardCache cache;
        // A leftover single sample cannot run train-mode BatchNorm; its
        // contribution is differentiated through the frozen statistics.
        const bool eval_chunk = k < 2;
        Matrix logits = eval_chunk ? forward_eval(params, x, &cache)
                                   : forward(params, x, Mode::kTrain, &cache);
        CrossEntropyResult ce = cross_entropy(logits, labels);
        res.loss += ce.loss * static_cast<double>(k) * inv_n;

        scale_inplace(ce.dlogits, static_cast<double>(k) * inv_n);
        const Gradients g = eval_chunk ? backward_eval(params, cache, ce.dlogits)
                                       : backward(params, cache, ce.dlogits);
        accumulate(res.grads, g);
    }
    return res;
}

}  // namespace dfr
