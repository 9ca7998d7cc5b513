#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dfr/matrix.hpp"

namespace dfr {

struct HistogramConfig {
    std::size_t bins = 10;
    // Fixed range [lo, hi], or the per-batch min/max of the union of both
    // inputs (gradient-detached) when fixed_range is false.
    bool fixed_range = false;
    double lo = 0.0;
    double hi = 0.0;
    // Triangular-kernel interpolation between the two nearest bin centers;
    // disabling it assigns each value fully to its nearest center.
    bool smoothing = true;
};

struct Histogram {
    std::vector<double> masses;     // length bins
    std::vector<double> bin_edges;  // length bins + 1
};

// Soft histogram plus the data needed to push a mass-space gradient back
// onto the contributing values.
struct SoftHistogram {
    Histogram hist;
    std::vector<int> lo_bin;       // lower of the two bins each value feeds
    std::vector<double> slope;     // d(upper-bin mass)/d(value); 0 when clamped
    // dvalues[i] = (dmasses[lo_bin+1] - dmasses[lo_bin]) * slope[i]
    std::vector<double> value_gradient(std::span<const double> dmasses) const;
};

SoftHistogram soft_histogram(std::span<const double> values, std::size_t bins, double lo, double hi,
                             bool smoothing = true);
SoftHistogram soft_histogram(std::span<const double> values, const HistogramConfig& cfg);

struct HistogramLossResult {
    double loss = 0.0;
    Matrix d_reg;
    Matrix d_tgt;
};

// L1 distance between the unit-mass histograms of the two matrices, both
// flattened to plain value sequences over a shared range.
HistogramLossResult histogram_loss(const Matrix& out_reg, const Matrix& out_tgt,
                                   const HistogramConfig& cfg);

// Squared maximum mean discrepancy with a Gaussian kernel of width
// `bandwidth` (comparison readout, never trained on).
double mmd_value(const Matrix& a, const Matrix& b, double bandwidth);

// Squared Frobenius distance between sample covariances, scaled by 1/(4 d^2).
double coral_value(const Matrix& a, const Matrix& b);

}  // namespace dfr
