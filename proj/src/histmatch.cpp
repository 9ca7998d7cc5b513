#include "dfr/histmatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dfr/errors.hpp"

namespace dfr {
namespace {

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void resolve_range(const HistogramConfig& cfg, std::span<const double> a,
                   std::span<const double> b, double* lo, double* hi) {
    if (cfg.fixed_range) {
        if (!(cfg.lo < cfg.hi)) throw ConfigError("histogram: fixed range needs lo < hi");
        *lo = cfg.lo;
        *hi = cfg.hi;
        return;
    }
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (double v : a) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    for (double v : b) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    if (mx - mn < 1e-12) {
        mn -= 0.5;
        mx += 0.5;
    }
    *lo = mn;
    *hi = mx;
}

Matrix sample_covariance(const Matrix& a) {
    const std::size_t n = a.rows(), d = a.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = a.row(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (double& m : mean) m /= static_cast<double>(n);
    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = a.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const double dj = row[j] - mean[j];
            for (std::size_t k = 0; k < d; ++k) cov(j, k) += dj * (row[k] - mean[k]);
        }
    }
    scale_inplace(cov, 1.0 / static_cast<double>(n - 1));
    return cov;
}

}  // namespace

std::vector<double> SoftHistogram::value_gradient(std::span<const double> dmasses) const {
    std::vector<double> g(lo_bin.size(), 0.0);
    for (std::size_t i = 0; i < lo_bin.size(); ++i) {
        if (slope[i] == 0.0) continue;
        const int k = lo_bin[i];
        g[i] = (dmasses[k + 1] - dmasses[k]) * slope[i];
    }
    return g;
}

SoftHistogram soft_histogram(std::span<const double> values, std::size_t bins, double lo, double hi,
                             bool smoothing) {
    if (bins < 2) throw ConfigError("soft_histogram: need at least 2 bins");
    if (!(lo < hi)) throw ConfigError("soft_histogram: range needs lo < hi");
    if (values.empty()) throw DataError("soft_histogram: empty input");
    for (double v : values) {
        if (!std::isfinite(v)) throw NumericError("soft_histogram: non-finite value");
    }

    const double width = (hi - lo) / static_cast<double>(bins);
    SoftHistogram out;
    out.hist.masses.assign(bins, 0.0);
    out.hist.bin_edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) out.hist.bin_edges[k] = lo + static_cast<double>(k) * width;
    out.lo_bin.resize(values.size());
    out.slope.resize(values.size());

    const double last_center = static_cast<double>(bins - 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        // Position in bin-center coordinates: center k sits at u = k.
        const double u = (values[i] - lo) / width - 0.5;
        if (!smoothing) {
            long k = static_cast<long>(std::floor((values[i] - lo) / width));
            k = std::clamp(k, 0L, static_cast<long>(bins) - 1);
            out.hist.masses[static_cast<std::size_t>(k)] += 1.0;
            out.lo_bin[i] = static_cast<int>(std::min<long>(k, static_cast<long>(bins) - 2));
            out.slope[i] = 0.0;
            continue;
        }
        if (u <= 0.0) {
            out.hist.masses[0] += 1.0;
            out.lo_bin[i] = 0;
            out.slope[i] = 0.0;
        } else if (u >= last_center) {
            out.hist.masses[bins - 1] += 1.0;
            out.lo_bin[i] = static_cast<int>(bins) - 2;
            out.slope[i] = 0.0;
        } else {
            std::size_t k = static_cast<std::size_t>(u);
            if (k >= bins - 1) k = bins - 2;
            const double frac = u - static_cast<double>(k);
            out.hist.masses[k] += 1.0 - frac;
            out.hist.masses[k + 1] += frac;
            out.lo_bin[i] = static_cast<int>(k);
            out.slope[i] = 1.0 / width;
        }
    }
    return out;
}

SoftHistogram soft_histogram(std::span<const double> values, const HistogramConfig& cfg) {
    double lo, hi;
    resolve_range(cfg, values, {}, &lo, &hi);
    return soft_histogram(values, cfg.bins, lo, hi, cfg.smoothing);
}

HistogramLossResult histogram_loss(const Matrix& out_reg, const Matrix& out_tgt,
                                   const HistogramConfig& cfg) {
    if (out_reg.empty() || out_tgt.empty()) throw DataError("histogram_loss: empty input matrix");

    std::span<const double> va(out_reg.data(), out_reg.size());
    std::span<const double> vb(out_tgt.data(), out_tgt.size());
    double lo, hi;
    resolve_range(cfg, va, vb, &lo, &hi);

    SoftHistogram ha = soft_histogram(va, cfg.bins, lo, hi, cfg.smoothing);
    SoftHistogram hb = soft_histogram(vb, cfg.bins, lo, hi, cfg.smoothing);

    const double inv_na = 1.0 / static_cast<double>(out_reg.size());
    const double inv_nb = 1.0 / static_cast<double>(out_tgt.size());

    HistogramLossResult res;
    std::vector<double> dmass_a(cfg.bins, 0.0), dmass_b(cfg.bins, 0.0);
    for (std::size_t h = 0; h < cfg.bins; ++h) {
        const double diff = ha.hist.masses[h] * inv_na - hb.hist.masses[h] * inv_nb;
        res.loss += std::abs(diff);
        const double s = sign0(diff);
        dmass_a[h] = s * inv_na;
        dmass_b[h] = -s * inv_nb;
    }

    const std::vector<double> ga = ha.value_gradient(dmass_a);
    const std::vector<double> gb = hb.value_gradient(dmass_b);
    res.d_reg = Matrix(out_reg.rows(), out_reg.cols());
    res.d_tgt = Matrix(out_tgt.rows(), out_tgt.cols());
    std::copy(ga.begin(), ga.end(), res.d_reg.data());
    std::copy(gb.begin(), gb.end(), res.d_tgt.data());
    return res;
}

double mmd_value(const Matrix& a, const Matrix& b, double bandwidth) {
    if (a.cols() != b.cols()) throw ConfigError("mmd_value: matrices differ in width");
    if (a.rows() == 0 || b.rows() == 0) throw DataError("mmd_value: empty input");
    if (bandwidth <= 0.0) throw ConfigError("mmd_value: bandwidth must be positive");

    const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);
    auto kernel_mean = [&](const Matrix& x, const Matrix& y) {
        double total = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            const double* xi = x.row(i);
            for (std::size_t j = 0; j < y.rows(); ++j) {
                const double* yj = y.row(j);
                double d2 = 0.0;
                for (std::size_t k = 0; k < x.cols(); ++k) {
                    const double d = xi[k] - yj[k];
                    d2 += d * d;
                }
                total += std::exp(-gamma * d2);
            }
        }
        return total / (static_cast<double>(x.rows()) * static_cast<double>(y.rows()));
    };
    return kernel_mean(a, a) + kernel_mean(b, b) - 2.0 * kernel_mean(a, b);
}

double coral_value(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ConfigError("coral_value: matrices differ in width");
    if (a.rows() < 2 || b.rows() < 2) throw DataError("coral_value: need at least 2 rows per matrix");

    const Matrix ca = sample_covariance(a);
    const Matrix cb = sample_covariance(b);
    double fro2 = 0.0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
        const double d = ca.data()[i] - cb.data()[i];
        fro2 += d * d;
    }
    const double d = static_cast<double>(a.cols());
    return fro2 / (4.0 * d * d);
}

}  // namespace dfr
