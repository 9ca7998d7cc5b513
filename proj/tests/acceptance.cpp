// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. argv[1] = path to the CLI binary, argv[2] = shipped default
// config (both supplied by CTest).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dfr/errors.hpp"
#include "dfr/finite_diff.hpp"
#include "dfr/harness.hpp"
#include "dfr/histmatch.hpp"
#include "dfr/network.hpp"
#include "dfr/pseudolabel.hpp"
#include "dfr/registration.hpp"
#include "dfr/trainer.hpp"
#include "grad_check.hpp"
#include "test_util.hpp"

using dfr::DomainDataset;
using dfr::Matrix;
using dfr::TrainConfig;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------
// 1. Gradient integrity: analytic vs central finite differences for the
//    registration loss, the cross-entropy composite, the histogram loss
//    composite, and the pseudo-labeled target loss.
void criterion_gradients() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    int instances = 0;

    // Registration loss at random points away from the L1 kinks.
    dfr::Rng rng(101);
    for (int trial = 0; instances < 4 && trial < 60; ++trial) {
        const Matrix s = testutil::random_uniform(rng, 4, 6, -1.0, 1.0);
        const Matrix t = testutil::random_uniform(rng, 4, 6, -1.0, 1.0);
        const Matrix f = testutil::random_uniform(rng, 4, 6, -1.0, 1.0);
        bool clean = true;
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (std::abs(f.data()[i] - s.data()[i]) < 1e-3 ||
                std::abs(f.data()[i] - t.data()[i]) < 1e-3) {
                clean = false;
            }
        }
        if (!clean) continue;
        ++instances;
        const double alpha = (instances % 2 == 0) ? 0.6 : 1.5;
        const auto rl = dfr::registration_loss(f, s, t, alpha);
        auto loss = [&](const Matrix& m) { return dfr::registration_loss(m, s, t, alpha).loss; };
        const Matrix fd = dfr::finite_diff_gradient(loss, f, 1e-5);
        worst = std::max(worst, testutil::max_fd_rel_err(rl.grad, fd));
    }

    // Cross-entropy through the network, all parameter tensors + input.
    const std::size_t dims[3] = {6, 8, 5};
    for (int k = 0; k < 3; ++k) {
        testutil::GradCheckInstance inst =
            testutil::make_margin_instance(dims[k], 3 + (k % 2), 4 + 2 * (k % 2), 500 + k);
        dfr::NetworkParams work = inst.params;
        dfr::ForwardCache cache;
        const Matrix logits = dfr::forward(work, inst.x, dfr::Mode::kTrain, &cache);
        const auto ce = dfr::cross_entropy(logits, inst.labels);
        const dfr::Gradients analytic = dfr::backward(work, cache, ce.dlogits);
        auto loss_fn = [&](dfr::NetworkParams& probe) {
            return dfr::cross_entropy(dfr::forward(probe, inst.x, dfr::Mode::kTrain), inst.labels)
                .loss;
        };
        dfr::Rng prng(600 + k);
        worst = std::max(worst,
                         testutil::max_param_grad_rel_err(inst.params, loss_fn, analytic, prng, 20, 1e-5));
        auto loss_of_input = [&](const Matrix& x) {
            dfr::NetworkParams probe = inst.params;
            return dfr::cross_entropy(dfr::forward(probe, x, dfr::Mode::kTrain), inst.labels).loss;
        };
        const Matrix fd_in = dfr::finite_diff_gradient(loss_of_input, inst.x, 1e-5);
        worst = std::max(worst, testutil::max_fd_rel_err(analytic.input, fd_in));
        ++instances;
    }

    // Histogram loss composite via both network branches, fixed range so
    // only the interpolation weights carry gradient.
    dfr::HistogramConfig hist_cfg;
    hist_cfg.bins = 6;
    hist_cfg.fixed_range = true;
    for (int k = 0; k < 3; ++k) {
        const std::size_t d = 5 + static_cast<std::size_t>(k);
        bool accepted = false;
        for (std::uint64_t attempt = 0; attempt < 50 && !accepted; ++attempt) {
            testutil::GradCheckInstance inst =
                testutil::make_margin_instance(d, 3, 4, 700 + 31 * k + 1009 * attempt);
            dfr::Rng xrng(800 + k + attempt);
            const Matrix xb = testutil::random_uniform(xrng, 4, d, -3.0, 3.0);

            dfr::NetworkParams work = inst.params;
            dfr::ForwardCache ca, cb;
            const Matrix la = dfr::forward(work, inst.x, dfr::Mode::kTrain, &ca);
            const Matrix lb = dfr::forward(work, xb, dfr::Mode::kTrain, &cb);
            double lo = 1e300, hi = -1e300;
            for (double v : la.values()) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            for (double v : lb.values()) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            hist_cfg.lo = lo - 0.25;
            hist_cfg.hi = hi + 0.25;
            const double width = (hist_cfg.hi - hist_cfg.lo) / 6.0;

            // Margin from interpolation corners and from histogram ties.
            auto clean_logits = [&](const Matrix& m) {
                for (double v : m.values()) {
                    const double u = (v - hist_cfg.lo) / width - 0.5;
                    if (std::abs(u - std::round(u)) * width < 5e-3) return false;
                }
                return true;
            };
            if (!clean_logits(la) || !clean_logits(lb)) continue;
            const auto hsa = dfr::soft_histogram({la.data(), la.size()}, hist_cfg);
            const auto hsb = dfr::soft_histogram({lb.data(), lb.size()}, hist_cfg);
            bool tied = false;
            for (std::size_t h = 0; h < 6; ++h) {
                if (std::abs(hsa.hist.masses[h] - hsb.hist.masses[h]) / la.size() < 5e-3) tied = true;
            }
            if (tied) continue;
            accepted = true;
            ++instances;

            const auto hl = dfr::histogram_loss(la, lb, hist_cfg);
            dfr::Gradients analytic = dfr::backward(work, ca, hl.d_reg);
            const dfr::Gradients gb = dfr::backward(work, cb, hl.d_tgt);
            for (const testutil::TensorRef& ref : testutil::param_tensors()) {
                dfr::add_inplace(analytic.*(ref.grad), gb.*(ref.grad));
            }
            auto loss_fn = [&](dfr::NetworkParams& probe) {
                const Matrix pa = dfr::forward(probe, inst.x, dfr::Mode::kTrain);
                const Matrix pb = dfr::forward(probe, xb, dfr::Mode::kTrain);
                return dfr::histogram_loss(pa, pb, hist_cfg).loss;
            };
            dfr::Rng prng(900 + k);
            worst = std::max(worst, testutil::max_param_grad_rel_err(inst.params, loss_fn, analytic,
                                                                     prng, 15, 1e-5));
        }
    }

    // Pseudo-labeled target loss.
    for (int k = 0; k < 2; ++k) {
        testutil::GradCheckInstance inst = testutil::make_margin_instance(6, 4, 4, 1100 + k);
        dfr::PseudoLabelSet sel;
        sel.indices = {0, 1, 2, 3};
        sel.labels = inst.labels;
        sel.max_prob.assign(4, 0.9);
        sel.nearest.assign(4, 0);
        dfr::NetworkParams work = inst.params;
        const auto tl = dfr::target_loss(work, sel, inst.x, 4);
        auto loss_fn = [&](dfr::NetworkParams& probe) {
            return dfr::target_loss(probe, sel, inst.x, 4).loss;
        };
        dfr::Rng prng(1200 + k);
        worst = std::max(worst,
                         testutil::max_param_grad_rel_err(inst.params, loss_fn, tl.grads, prng, 20, 1e-5));
        ++instances;
    }

    const double secs = elapsed_since(t0);
    std::ostringstream msg;
    msg << "gradient integrity: " << instances << " instances, worst rel err " << worst << " (tol 1e-4), "
        << secs << " s (bound 10)";
    report(1, instances >= 10 && worst < 1e-4 && secs < 10.0, msg.str());
}

// ---------------------------------------------------------------------
// 2. Registration against the 1-D grid-search oracle.
void criterion_registration_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    dfr::Rng rng(202);
    const double alphas[4] = {0.3, 0.6, 1.5, 2.0};
    double worst = 0.0;
    bool structure_ok = true;
    for (int trial = 0; trial < 200; ++trial) {
        const double s = rng.uniform(-1.0, 1.0);
        const double t = rng.uniform(-1.0, 1.0);
        const double alpha = alphas[trial % 4];

        dfr::RegistrationConfig cfg;
        cfg.alpha = alpha;
        cfg.inner_steps = 4000;
        cfg.inner_lr = 0.003;
        cfg.tolerance = 0.0;
        const Matrix sm(1, 1, s), tm(1, 1, t);
        const double reg = dfr::register_features(sm, tm, cfg).registered(0, 0);

        const double lo = std::min(s, t) - 1.0, hi = std::max(s, t) + 1.0;
        double best_x = lo, best_f = 1e300;
        for (double x = lo; x <= hi; x += 1e-4) {
            const double f = std::abs(x - s) + alpha * std::abs(x - t);
            if (f < best_f) {
                best_f = f;
                best_x = x;
            }
        }
        worst = std::max(worst, std::abs(reg - best_x));
        if (alpha < 1.0 && std::abs(best_x - s) > 2e-4) structure_ok = false;
        if (alpha > 1.0 && std::abs(best_x - t) > 2e-4) structure_ok = false;
    }
    const double secs = elapsed_since(t0);
    std::ostringstream msg;
    msg << "registration oracle: 200 triples, worst |reg - grid| " << worst
        << " (tol 0.05), minimizer structure " << (structure_ok ? "s/t as expected" : "violated")
        << ", " << secs << " s (bound 5)";
    report(2, worst <= 0.05 && structure_ok && secs < 5.0, msg.str());
}

// ---------------------------------------------------------------------
// 3. Histogram correctness: mass conservation, hard-binning oracle,
//    identity, and the normalized upper bound.
void criterion_histograms() {
    dfr::Rng rng(303);
    bool ok = true;
    std::ostringstream why;

    for (int trial = 0; trial < 100 && ok; ++trial) {
        const std::size_t n = 1 + rng.index(60);
        std::vector<double> values(n);
        for (double& v : values) v = rng.uniform(-4.0, 4.0);
        const std::size_t bins = 2 + rng.index(14);
        const auto sh = dfr::soft_histogram(values, bins, -3.0, 3.0);
        double total = 0.0;
        for (double m : sh.hist.masses) total += m;
        if (std::abs(total - static_cast<double>(n)) > 1e-9) {
            ok = false;
            why << "mass conservation violated (" << total << " vs " << n << ")";
        }
    }

    for (int trial = 0; trial < 50 && ok; ++trial) {
        const Matrix a = testutil::random_normal(rng, 6, 4);
        const Matrix b = testutil::random_normal(rng, 9, 4);
        double lo = 1e300, hi = -1e300;
        for (double v : a.values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (double v : b.values()) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        dfr::HistogramConfig cfg;
        cfg.bins = 10;
        cfg.smoothing = false;
        const double soft_path = dfr::histogram_loss(a, b, cfg).loss;

        // Independent hard-binned evaluation of the same loss.
        const double width = (hi - lo) / 10.0;
        std::vector<double> ca(10, 0.0), cb(10, 0.0);
        for (double v : a.values()) {
            long k = std::clamp(static_cast<long>(std::floor((v - lo) / width)), 0L, 9L);
            ca[static_cast<std::size_t>(k)] += 1.0 / static_cast<double>(a.size());
        }
        for (double v : b.values()) {
            long k = std::clamp(static_cast<long>(std::floor((v - lo) / width)), 0L, 9L);
            cb[static_cast<std::size_t>(k)] += 1.0 / static_cast<double>(b.size());
        }
        double oracle = 0.0;
        for (std::size_t h = 0; h < 10; ++h) oracle += std::abs(ca[h] - cb[h]);
        if (std::abs(soft_path - oracle) > 1e-9) {
            ok = false;
            why << "hard-binning oracle disagrees (" << soft_path << " vs " << oracle << ")";
        }
    }

    for (int trial = 0; trial < 50 && ok; ++trial) {
        const Matrix a = testutil::random_normal(rng, 5, 3);
        const Matrix b = testutil::random_normal(rng, 8, 3);
        dfr::HistogramConfig cfg;
        const double self = dfr::histogram_loss(a, a, cfg).loss;
        const double cross = dfr::histogram_loss(a, b, cfg).loss;
        if (self != 0.0 || cross < 0.0 || cross > 2.0 + 1e-12) {
            ok = false;
            why << "identity/bound violated (self " << self << ", cross " << cross << ")";
        }
    }

    if (ok) why << "mass conservation, hard-binning oracle, identity and L_H <= 2 all hold";
    report(3, ok, "histograms: " + why.str());
}

// ---------------------------------------------------------------------
// 4. Pseudo-label selection: rule conjunction, threshold nesting, and
//    precision >= unconditional argmax accuracy over 20 seeds.
void criterion_pseudo_labels() {
    bool ok = true;
    std::ostringstream why;

    // Rule conjunction + nesting at a fixed model.
    dfr::Rng rng(404);
    const Matrix logits = testutil::random_normal(rng, 120, 4, 2.0);
    const Matrix centers = testutil::random_normal(rng, 4, 4);
    const dfr::ClassCenters cc{centers, {1, 1, 1, 1}};
    const Matrix probs = dfr::softmax(logits);
    std::vector<std::set<std::size_t>> sets;
    for (double p : {0.9, 0.6, 0.3}) {
        const dfr::PseudoLabelSet sel = dfr::select_pseudo_labels(logits, cc, p);
        for (std::size_t k = 0; k < sel.size(); ++k) {
            const std::size_t i = sel.indices[k];
            std::size_t argmax = 0;
            for (std::size_t j = 1; j < 4; ++j) {
                if (probs(i, j) > probs(i, argmax)) argmax = j;
            }
            const auto nc = dfr::nearest_center({logits.row(i), 4}, cc);
            if (!(sel.max_prob[k] > p) || nc.index != argmax ||
                sel.labels[k] != static_cast<int>(argmax)) {
                ok = false;
                why << "selection rule violated at index " << i << "; ";
            }
        }
        sets.emplace_back(sel.indices.begin(), sel.indices.end());
    }
    for (std::size_t i = 0; i + 1 < sets.size(); ++i) {
        if (!std::includes(sets[i + 1].begin(), sets[i + 1].end(), sets[i].begin(), sets[i].end())) {
            ok = false;
            why << "threshold nesting violated; ";
        }
    }

    // Precision vs argmax accuracy, averaged over 20 seeded runs.
    double precision_sum = 0.0, argmax_sum = 0.0;
    int counted = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        dfr::SyntheticSpec spec;
        spec.classes = 3;
        spec.dim = 8;
        spec.per_class = 60;
        spec.separation = 0.35;
        spec.covariance = 0.08;
        spec.shift_translation = 0.15;
        spec.shift_rotation_deg = 15.0;
        spec.shift_scale = 1.2;
        spec.seed = seed;
        auto [source, target] = dfr::generate_synthetic(spec);
        DomainDataset unlabeled = target;
        unlabeled.labels.reset();

        TrainConfig cfg;
        cfg.epochs = 5;
        cfg.batch_size = 30;
        cfg.seed = seed;
        cfg.enable_registration = false;
        cfg.enable_histogram = false;
        cfg.enable_pseudo = false;
        const dfr::TrainResult res = dfr::train(cfg, source, unlabeled);

        dfr::NetworkParams params = res.params;
        const Matrix src_logits = dfr::forward_eval(params, source.features);
        const dfr::ClassCenters trained_cc =
            dfr::compute_class_centers(src_logits, *source.labels, 3);
        const Matrix tgt_logits = dfr::forward_eval(params, target.features);
        const dfr::PseudoLabelSet sel = dfr::select_pseudo_labels(tgt_logits, trained_cc, 0.6);
        if (sel.empty()) continue;

        std::size_t correct = 0;
        for (std::size_t k = 0; k < sel.size(); ++k) {
            if (sel.labels[k] == (*target.labels)[sel.indices[k]]) ++correct;
        }
        precision_sum += static_cast<double>(correct) / static_cast<double>(sel.size());
        argmax_sum += dfr::evaluate(params, target).accuracy;
        ++counted;
    }
    const double mean_precision = precision_sum / counted;
    const double mean_argmax = argmax_sum / counted;
    if (counted < 20) {
        ok = false;
        why << "selection came back empty on " << (20 - counted) << " seeds; ";
    }
    if (mean_precision < mean_argmax) ok = false;
    why << "mean selection precision " << mean_precision << " vs argmax accuracy " << mean_argmax
        << " over " << counted << " seeds";
    report(4, ok, "pseudo labels: " + why.str());
}

// ---------------------------------------------------------------------
// 5. End-to-end adaptation gain on the synthetic benchmark.
void criterion_adaptation() {
    const auto t0 = std::chrono::steady_clock::now();
    double gain_sum = 0.0;
    std::ostringstream detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        dfr::SyntheticSpec spec;
        spec.classes = 4;
        spec.dim = 16;
        spec.per_class = 500;
        spec.separation = 0.3;
        spec.covariance = 0.05;
        spec.shift_translation = 0.45;
        spec.shift_rotation_deg = 15.0;
        spec.shift_scale = 1.6;
        spec.seed = seed;
        auto [source, target] = dfr::generate_synthetic(spec);
        DomainDataset unlabeled = target;
        unlabeled.labels.reset();

        TrainConfig cfg;
        cfg.epochs = 18;
        cfg.seed = seed;

        TrainConfig bare = cfg;
        bare.enable_registration = false;
        bare.enable_histogram = false;
        bare.enable_pseudo = false;

        const dfr::TrainResult source_only = dfr::train(bare, source, unlabeled);
        const dfr::TrainResult full = dfr::train(cfg, source, unlabeled);
        const double acc_src = dfr::evaluate(source_only.params, target).accuracy;
        const double acc_full = dfr::evaluate(full.params, target).accuracy;
        gain_sum += acc_full - acc_src;
        detail << " seed" << seed << " " << acc_src << "->" << acc_full;
    }
    const double mean_gain = 100.0 * gain_sum / 5.0;
    const double secs = elapsed_since(t0);
    std::ostringstream msg;
    msg << "adaptation: mean gain " << mean_gain << " pts (need >= 5)," << detail.str() << ", "
        << secs << " s (bound 180)";
    report(5, mean_gain >= 5.0 && secs < 180.0, msg.str());
}

// ---------------------------------------------------------------------
// 6. Ablation table structure and the soft ordering check.
void criterion_ablation() {
    dfr::SyntheticSpec spec;
    spec.classes = 4;
    spec.dim = 16;
    spec.per_class = 300;
    spec.separation = 0.34;
    spec.covariance = 0.05;
    spec.shift_translation = 0.45;
    spec.shift_rotation_deg = 10.0;
    spec.shift_scale = 1.5;
    spec.seed = 7;
    auto [source, target] = dfr::generate_synthetic(spec);

    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.seed = 7;
    const std::vector<dfr::AblationRow> rows = dfr::ablation_suite(cfg, source, target);

    bool names_ok = rows.size() == 8;
    if (names_ok) {
        for (std::size_t i = 0; i < 8; ++i) {
            if (rows[i].variant != dfr::kAblationVariants[i]) names_ok = false;
        }
    }
    double best = 0.0, full = 0.0;
    std::ostringstream table;
    for (const auto& r : rows) {
        best = std::max(best, r.accuracy);
        if (r.variant == "DFR") full = r.accuracy;
        table << " " << r.variant << "=" << r.accuracy;
    }
    const bool order_ok = full >= best - 0.01;
    std::ostringstream msg;
    msg << "ablation: 8 variants " << (names_ok ? "canonically named" : "MISNAMED") << ","
        << table.str() << "; full vs best " << 100.0 * (full - best) << " pts (need >= -1)";
    report(6, names_ok && order_ok, msg.str());
}

// ---------------------------------------------------------------------
// 7. CLI determinism: two identical train runs produce bit-identical
//    metrics (timing column aside, wall time is not reproducible) and
//    bit-identical checkpoints.
std::string strip_seconds_column(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t cut = line.rfind(',');
        out << (cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
    }
    return out.str();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_cli_determinism(const std::string& cli) {
    const std::string dir = "acceptance_tmp";
    if (std::system(("rm -rf " + dir + " && mkdir -p " + dir).c_str()) != 0) {
        report(7, false, "determinism: could not prepare scratch directory");
        return;
    }

    dfr::SyntheticSpec spec;
    spec.classes = 3;
    spec.dim = 8;
    spec.per_class = 40;
    spec.separation = 0.4;
    spec.covariance = 0.08;
    spec.seed = 9;
    auto [source, target] = dfr::generate_synthetic(spec);
    dfr::save_features(source, dir + "/source.csv");
    dfr::save_features(target, dir + "/target.csv");
    {
        std::ofstream conf(dir + "/run.conf");
        conf << "epochs = 4\nbatch_size = 20\nseed = 5\nreg_steps = 20\n";
    }

    bool ok = true;
    std::ostringstream why;
    for (int run = 1; run <= 2 && ok; ++run) {
        const std::string cmd = cli + " train --source " + dir + "/source.csv --target " + dir +
                                "/target.csv --config " + dir + "/run.conf --out-metrics " + dir +
                                "/metrics" + std::to_string(run) + ".csv --out-checkpoint " + dir +
                                "/ckpt" + std::to_string(run) + ".bin > " + dir + "/log" +
                                std::to_string(run) + ".txt 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            ok = false;
            why << "train run " << run << " exited nonzero; ";
        }
    }
    if (ok) {
        const std::string m1 = strip_seconds_column(slurp(dir + "/metrics1.csv"));
        const std::string m2 = strip_seconds_column(slurp(dir + "/metrics2.csv"));
        if (m1.empty() || m1 != m2) {
            ok = false;
            why << "metrics differ between runs; ";
        }
        const std::string c1 = slurp(dir + "/ckpt1.bin");
        const std::string c2 = slurp(dir + "/ckpt2.bin");
        if (c1.empty() || c1 != c2) {
            ok = false;
            why << "checkpoints differ between runs; ";
        }
    }
    if (std::system(("rm -rf " + dir).c_str()) != 0) why << "(scratch cleanup failed) ";
    if (ok) why << "metrics (timing column aside) and checkpoints bit-identical";
    report(7, ok, "determinism: " + why.str());
}

// ---------------------------------------------------------------------
// 8. Shipped defaults audit.
void criterion_defaults(const std::string& conf_path) {
    bool ok = true;
    std::ostringstream why;
    try {
        const TrainConfig cfg = dfr::load_train_config(conf_path);
        const TrainConfig code_defaults;

        auto check = [&](bool cond, const std::string& what) {
            if (!cond) {
                ok = false;
                why << what << " mismatch; ";
            }
        };
        check(cfg.alpha == 0.6, "alpha");
        check(cfg.beta == 0.01, "beta");
        check(cfg.rounds == 3, "rounds");
        check(cfg.thresholds == std::vector<double>{0.9, 0.6, 0.3}, "thresholds");
        check(cfg.epochs == 210, "epochs");
        check(cfg.batch_size == 64, "batch_size");
        check(cfg.learning_rate == 0.001, "learning_rate");
        check(cfg.bins == 10, "bins");

        check(code_defaults.alpha == cfg.alpha, "code default alpha");
        check(code_defaults.beta == cfg.beta, "code default beta");
        check(code_defaults.rounds == cfg.rounds, "code default rounds");
        check(code_defaults.thresholds == cfg.thresholds, "code default thresholds");
        check(code_defaults.epochs == cfg.epochs, "code default epochs");
        check(code_defaults.batch_size == cfg.batch_size, "code default batch_size");
        check(code_defaults.learning_rate == cfg.learning_rate, "code default learning_rate");
        check(code_defaults.bins == cfg.bins, "code default bins");
    } catch (const std::exception& e) {
        ok = false;
        why << e.what();
    }
    if (ok) why << "0.6 / 0.01 / 3 / [0.9,0.6,0.3] / 210 / 64 / 0.001 / 10 all present";
    report(8, ok, "defaults audit: " + why.str());
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: acceptance <cli-binary> <default-config>\n");
        return 2;
    }
    criterion_gradients();
    criterion_registration_oracle();
    criterion_histograms();
    criterion_pseudo_labels();
    criterion_adaptation();
    criterion_ablation();
    criterion_cli_determinism(argv[1]);
    criterion_defaults(argv[2]);

    if (g_failures == 0) {
        std::printf("all 8 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria failed\n", g_failures);
    return 1;
}
