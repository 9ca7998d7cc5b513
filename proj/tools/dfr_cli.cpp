#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dfr/errors.hpp"
#include "dfr/harness.hpp"
#include "dfr/network.hpp"
#include "dfr/trainer.hpp"

namespace {

int run_gen(const std::string& spec_path, const std::string& out_source,
            const std::string& out_target, bool seed_set, std::uint64_t seed) {
    dfr::SyntheticSpec spec = dfr::load_synthetic_spec(spec_path);
    if (seed_set) spec.seed = seed;
    auto [source, target] = dfr::generate_synthetic(spec);
    dfr::save_features(source, out_source);
    dfr::save_features(target, out_target);
    std::cout << "wrote " << source.size() << " source and " << target.size()
              << " target samples (dim " << source.dim() << ", " << spec.classes << " classes)\n";
    return 0;
}

int run_train(const std::string& source_path, const std::string& target_path,
              const std::string& config_path, const std::string& out_metrics,
              const std::string& out_checkpoint, bool no_reg, bool no_hist, bool no_pseudo) {
    dfr::TrainConfig cfg = dfr::load_train_config(config_path);
    if (no_reg) cfg.enable_registration = false;
    if (no_hist) cfg.enable_histogram = false;
    if (no_pseudo) cfg.enable_pseudo = false;

    const dfr::DomainDataset source = dfr::load_features(source_path);
    const dfr::DomainDataset target = dfr::load_features(target_path);
    const dfr::TrainResult result = dfr::train(cfg, source, target);
    dfr::write_metrics(result.history, out_metrics);
    dfr::save_checkpoint(result.params, out_checkpoint);

    for (const dfr::RoundStats& r : result.history.rounds) {
        std::printf("round %zu (epoch %zu, p_t %.2f): selected %zu", r.round, r.start_epoch,
                    r.threshold, r.n_pt);
        if (!std::isnan(r.precision)) std::printf(", precision %.4f", r.precision);
        std::printf("\n");
    }
    if (!result.history.epochs.empty()) {
        const dfr::EpochRecord& last = result.history.epochs.back();
        std::printf("epoch %zu: L_S %.4f L_R %.4f L_H %.4f L_T %.4f n_pt %zu\n", last.epoch,
                    last.l_s, last.l_r, last.l_h, last.l_t, last.n_pt);
        if (target.labeled()) std::printf("target accuracy %.4f\n", last.target_accuracy);
    }
    std::cout << "metrics: " << out_metrics << "\ncheckpoint: " << out_checkpoint << "\n";
    return 0;
}

int run_eval(const std::string& checkpoint_path, const std::string& data_path) {
    const dfr::NetworkParams params = dfr::load_checkpoint(checkpoint_path);
    const dfr::DomainDataset data = dfr::load_features(data_path);
    const dfr::Evaluation ev = dfr::evaluate(params, data);
    std::printf("accuracy %.6f\n", ev.accuracy);
    for (std::size_t c = 0; c < ev.per_class.size(); ++c) {
        std::printf("class %zu accuracy %.6f\n", c, ev.per_class[c]);
    }
    return 0;
}

int run_ablate(const std::string& source_path, const std::string& target_path,
               const std::string& config_path, const std::string& out_path) {
    const dfr::TrainConfig cfg = dfr::load_train_config(config_path);
    const dfr::DomainDataset source = dfr::load_features(source_path);
    const dfr::DomainDataset target = dfr::load_features(target_path);
    const std::vector<dfr::AblationRow> rows = dfr::ablation_suite(cfg, source, target);
    dfr::write_ablation(rows, out_path);
    for (const dfr::AblationRow& r : rows) std::printf("%-10s %.4f\n", r.variant.c_str(), r.accuracy);
    std::cout << "ablation table: " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature-space unsupervised domain adaptation: feature registration, "
                 "histogram matching, and recurrent pseudo-label refinement on "
                 "precomputed feature vectors"};
    app.require_subcommand(1);

    std::string spec_path, out_source, out_target;
    std::uint64_t seed = 0;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic source/target benchmark pair");
    gen->add_option("--spec", spec_path, "Synthetic spec file (key = value)")->required();
    gen->add_option("--out-source", out_source, "Source CSV output path")->required();
    gen->add_option("--out-target", out_target, "Target CSV output path")->required();
    auto* seed_opt = gen->add_option("--seed", seed, "Override the spec's seed");

    std::string source_path, target_path, config_path, out_metrics, out_checkpoint;
    bool no_reg = false, no_hist = false, no_pseudo = false;
    auto* train = app.add_subcommand("train", "Train the adaptation model");
    train->add_option("--source", source_path, "Labeled source CSV")->required();
    train->add_option("--target", target_path, "Target CSV (labels optional, evaluation only)")
        ->required();
    train->add_option("--config", config_path, "Training config file")->required();
    train->add_option("--out-metrics", out_metrics, "Per-epoch metrics CSV")->required();
    train->add_option("--out-checkpoint", out_checkpoint, "Final parameter checkpoint")->required();
    train->add_flag("--disable-registration", no_reg, "Feed raw source batches to the classifier");
    train->add_flag("--disable-histogram", no_hist, "Drop the histogram matching loss");
    train->add_flag("--disable-pseudo", no_pseudo, "Drop pseudo-label refinement");

    std::string checkpoint_path, data_path;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a labeled CSV");
    eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
    eval->add_option("--data", data_path, "Labeled CSV")->required();

    std::string ab_source, ab_target, ab_config, ab_out;
    auto* ablate = app.add_subcommand("ablate", "Run the eight loss-toggle variants");
    ablate->add_option("--source", ab_source, "Labeled source CSV")->required();
    ablate->add_option("--target", ab_target, "Labeled target CSV")->required();
    ablate->add_option("--config", ab_config, "Training config file")->required();
    ablate->add_option("--out", ab_out, "Output CSV (variant,target_accuracy)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen(spec_path, out_source, out_target, seed_opt->count() > 0, seed);
        if (train->parsed())
            return run_train(source_path, target_path, config_path, out_metrics, out_checkpoint,
                             no_reg, no_hist, no_pseudo);
        if (eval->parsed()) return run_eval(checkpoint_path, data_path);
        if (ablate->parsed()) return run_ablate(ab_source, ab_target, ab_config, ab_out);
    } catch (const dfr::ConfigError& e) {
        std::cerr << "error[config]: " << e.what() << "\n";
        return 2;
    } catch (const dfr::DataError& e) {
        std::cerr << "error[data]: " << e.what() << "\n";
        return 3;
    } catch (const dfr::NumericError& e) {
        std::cerr << "error[numeric]: " << e.what() << "\n";
        return 4;
    } catch (const dfr::IoError& e) {
        std::cerr << "error[io]: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
