#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "ttclass/cli.hpp"

namespace {

using ttclass::cli::Command;
using ttclass::cli::Method;
using ttclass::cli::RunConfig;

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--alpha", cfg.alpha, "trig feature map parameter")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    cmd->add_option("--workers", cfg.workers, "worker count, 0 = logical cores")->capture_default_str();
    cmd->add_flag("--reduce", cfg.reduce, "2x2 mean pooling of the images");
    cmd->add_flag("--fashion", cfg.fashion, "use the fashion item class names");
    cmd->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
}

void add_data_options(CLI::App* cmd, RunConfig& cfg, bool labels_required) {
    cmd->add_option("--images", cfg.images_path, "IDX image file (gzip accepted)")->required();
    auto* labels = cmd->add_option("--labels", cfg.labels_path, "IDX label file (gzip accepted)");
    if (labels_required) labels->required();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tensor-train image classifiers: closed-form kernel regression and alternating ridge regression"};
    app.require_subcommand(1);

    RunConfig cfg;
    if (const char* cap = std::getenv("TTCLASS_MAX_GRAM")) cfg.gram_cap = std::atoll(cap);

    std::string method = "mandy";

    CLI::App* train = app.add_subcommand("train", "fit a classifier and write a model file");
    train->add_option("--method", method, "mandy or arr")->check(CLI::IsMember({"mandy", "arr"}))->capture_default_str();
    train->add_option("--ridge", cfg.ridge, "ridge parameter of the Gram solve")->capture_default_str();
    train->add_option("--rank", cfg.arr.rank, "target TT rank per label")->capture_default_str();
    train->add_option("--sweeps", cfg.arr.sweeps, "sweep repetitions")->capture_default_str();
    train->add_option("--svd-threshold", cfg.arr.svd_threshold, "relative truncation of subproblem solves")->capture_default_str();
    train->add_option("--tol", cfg.arr.tol, "optional early-exit tolerance on the residual")->capture_default_str();
    train->add_option("--train-count", cfg.train_count, "stratified subsample size, 0 = all")->capture_default_str();
    add_data_options(train, cfg, true);
    add_common_options(train, cfg);

    CLI::App* evaluate = app.add_subcommand("evaluate", "accuracy, per-class metrics, misclassification pairs");
    evaluate->add_option("--model", cfg.model_path, "model file")->required();
    evaluate->add_option("--test-count", cfg.test_count, "stratified subsample size, 0 = all")->capture_default_str();
    add_data_options(evaluate, cfg, true);
    add_common_options(evaluate, cfg);

    CLI::App* classify = app.add_subcommand("classify", "labels and score vectors for images");
    classify->add_option("--model", cfg.model_path, "model file")->required();
    classify->add_option("--images", cfg.images_path, "IDX image file or single PGM image")->required();
    classify->add_option("--test-count", cfg.test_count, "only the first N images, 0 = all")->capture_default_str();
    add_common_options(classify, cfg);

    CLI::App* sensitivity = app.add_subcommand("sensitivity", "per-label pixel sensitivity heat maps");
    sensitivity->add_option("--model", cfg.model_path, "model file")->required();
    sensitivity->add_option("--baseline", cfg.sensitivity_baseline, "constant image value")->capture_default_str();
    add_common_options(sensitivity, cfg);

    CLI::App* confusion = app.add_subcommand("confusion", "misclassification pair histogram only");
    confusion->add_option("--model", cfg.model_path, "model file")->required();
    confusion->add_option("--test-count", cfg.test_count, "stratified subsample size, 0 = all")->capture_default_str();
    add_data_options(confusion, cfg, true);
    add_common_options(confusion, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    cfg.method = method == "arr" ? Method::Arr : Method::Mandy;
    if (train->parsed()) cfg.command = Command::Train;
    else if (evaluate->parsed()) cfg.command = Command::Evaluate;
    else if (classify->parsed()) cfg.command = Command::Classify;
    else if (sensitivity->parsed()) cfg.command = Command::Sensitivity;
    else cfg.command = Command::Confusion;

    return ttclass::cli::run(cfg);
}
