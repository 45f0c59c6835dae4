#include "ttclass/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <json.hpp>

#include "ttclass/dataset.hpp"
#include "ttclass/model_io.hpp"

namespace ttclass::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr double kNoEvidenceThreshold = 1e-12;

std::string method_name(Method method) { return method == Method::Mandy ? "mandy" : "arr"; }

Json config_json(const RunConfig& cfg) {
    Json j;
    j["method"] = method_name(cfg.method);
    j["alpha"] = cfg.alpha;
    j["ridge"] = cfg.ridge;
    j["rank"] = cfg.arr.rank;
    j["sweeps"] = cfg.arr.sweeps;
    j["svd_threshold"] = cfg.arr.svd_threshold;
    j["tol"] = cfg.arr.tol;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["reduce"] = cfg.reduce;
    j["fashion"] = cfg.fashion;
    j["train_count"] = cfg.train_count;
    j["test_count"] = cfg.test_count;
    j["gram_cap"] = cfg.gram_cap;
    j["sensitivity_baseline"] = cfg.sensitivity_baseline;
    j["images"] = cfg.images_path;
    j["labels"] = cfg.labels_path;
    j["model"] = cfg.model_path;
    return j;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// CSV matrix with a leading header column of class names.
void write_labeled_csv(const fs::path& path, const std::vector<std::string>& class_names,
                       const Matrix& M, bool integral) {
    std::string text = "true_label";
    for (const std::string& name : class_names) text += "," + name;
    text += "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        text += class_names[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            text += "," + (integral ? std::to_string(static_cast<long long>(M(i, j)))
                                    : format_double(M(i, j)));
        text += "\n";
    }
    write_text_file(path, text);
}

/// Raw values as CSV, one image row per line.
void write_matrix_csv(const fs::path& path, const Matrix& M) {
    std::string text;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) text += ",";
            text += format_double(M(i, j));
        }
        text += "\n";
    }
    write_text_file(path, text);
}

/// 8-bit binary PGM, min-max normalized.
void write_pgm(const fs::path& path, const Matrix& M) {
    const double lo = M.minCoeff();
    const double hi = M.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    std::string text = "P5\n" + std::to_string(M.cols()) + " " + std::to_string(M.rows()) + "\n255\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            text += static_cast<char>(
                static_cast<unsigned char>(std::lround((M(i, j) - lo) / span * 255.0)));
    write_text_file(path, text);
}

Dataset load_input_dataset(const RunConfig& cfg, Eigen::Index count) {
    Dataset ds = load_idx(cfg.images_path, cfg.labels_path,
                          cfg.fashion ? fashion_class_names() : digit_class_names());
    if (cfg.reduce) ds = reduce_pool2(ds);
    if (count > 0 && count < ds.sample_count()) ds = subsample(ds, count, cfg.seed);
    return ds;
}

io::StoredModel load_model_checked(const RunConfig& cfg) {
    if (cfg.model_path.empty()) throw ValidationError("a model path is required for this command");
    return io::load_model(cfg.model_path);
}

Matrix model_scores(const io::StoredModel& model, const Matrix& X) {
    if (X.rows() != model.basis().coordinate_count())
        throw ValidationError("input dimension " + std::to_string(X.rows()) +
                              " does not match model dimension " +
                              std::to_string(model.basis().coordinate_count()) +
                              " (did you forget --reduce?)");
    return model.is_kernel() ? mandy::decision_values(*model.kernel, X)
                             : arr::decision_values(*model.tt, X);
}

struct Timer {
    Clock::time_point start{Clock::now()};
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }
};

void write_run_info(const fs::path& out_dir, const Json& timings) {
    Json j;
    j["timings_seconds"] = timings;
    write_json(out_dir / "run_info.json", j);
}

void ensure_out_dir(const RunConfig& cfg) {
    if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
}

double accuracy_of(const Matrix& scores, const Dataset& ds) {
    Eigen::Index correct = 0;
    for (Eigen::Index j = 0; j < ds.sample_count(); ++j)
        if (mandy::argmax_label(scores.col(j)) == ds.label_of(j)) ++correct;
    return static_cast<double>(correct) / static_cast<double>(ds.sample_count());
}

}  // namespace

void RunConfig::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ValidationError("--alpha must be positive and finite");
    if (ridge < 0.0 || !std::isfinite(ridge)) throw ValidationError("--ridge must be >= 0");
    arr.validate();
    if (train_count < 0 || test_count < 0)
        throw ValidationError("sample caps must be non-negative");
    if (workers < 0) throw ValidationError("--workers must be >= 0");
    if (gram_cap < 1) throw ValidationError("TTCLASS_MAX_GRAM must be >= 1");
    if (sensitivity_baseline < 0.0 || sensitivity_baseline > 1.0)
        throw ValidationError("--baseline must lie in [0, 1]");
    if (command == Command::Train || command == Command::Evaluate || command == Command::Confusion) {
        if (images_path.empty() || labels_path.empty())
            throw ValidationError("--images and --labels are required");
    }
}

int exit_code_for(const std::exception& error) noexcept {
    if (dynamic_cast<const ValidationError*>(&error)) return 2;
    if (dynamic_cast<const NumericalError*>(&error)) return 3;
    if (dynamic_cast<const IoError*>(&error)) return 4;
    return 3;
}

void cmd_train(const RunConfig& cfg) {
    cfg.validate();
    ensure_out_dir(cfg);

    Timer total;
    Timer loading;
    const Dataset train = load_input_dataset(cfg, cfg.train_count);
    const double load_seconds = loading.seconds();
    const FeatureBasis basis = FeatureBasis::trig(train.pixel_count(), cfg.alpha);

    io::StoredModel stored;
    stored.height = train.height;
    stored.width = train.width;
    stored.class_names = train.class_names;

    Json metrics;
    metrics["command"] = "train";
    metrics["config"] = config_json(cfg);
    metrics["train_samples"] = train.sample_count();
    metrics["image_height"] = train.height;
    metrics["image_width"] = train.width;

    Timer fitting;
    Matrix training_scores;
    if (cfg.method == Method::Mandy) {
        stored.kernel = mandy::fit(train.X, train.Y, basis, cfg.ridge, cfg.gram_cap);
        training_scores = mandy::decision_values(*stored.kernel, train.X);
        metrics["gram_size"] = train.sample_count();
    } else {
        arr::ArrConfig arr_cfg = cfg.arr;
        arr_cfg.seed = cfg.seed;
        arr_cfg.subproblem_ridge = cfg.ridge;  // --ridge maps to the per-solve l2 term here
        std::vector<std::vector<double>> residual_logs;
        stored.tt = arr::fit(train.X, train.Y, basis, arr_cfg, &residual_logs, cfg.workers);
        training_scores = arr::decision_values(*stored.tt, train.X);
        Json residuals = Json::array();
        for (const auto& log : residual_logs) residuals.push_back(log);
        metrics["half_sweep_residuals"] = residuals;
        Json ranks = Json::array();
        for (const TensorTrain& part : stored.tt->parts) ranks.push_back(part.ranks());
        metrics["part_ranks"] = ranks;
    }
    const double fit_seconds = fitting.seconds();

    metrics["training_accuracy"] = accuracy_of(training_scores, train);

    const fs::path out_dir(cfg.out_dir);
    io::save_model((out_dir / "model.ttcm").string(), stored);
    write_json(out_dir / "metrics.json", metrics);

    Json timings;
    timings["load"] = load_seconds;
    timings["fit"] = fit_seconds;
    timings["total"] = total.seconds();
    write_run_info(out_dir, timings);

    std::cout << "trained " << method_name(cfg.method) << " model on " << train.sample_count()
              << " samples; training accuracy " << metrics["training_accuracy"].dump() << "\n";
}

namespace {

struct EvalResult {
    Matrix scores;
    std::vector<Eigen::Index> predicted;
    Matrix mispair;  ///< d' x d' misclassification pair counts, zero diagonal
    double accuracy;
};

EvalResult evaluate_on(const io::StoredModel& model, const Dataset& ds) {
    if (ds.sample_count() < 1) throw ValidationError("evaluate: empty test set");
    EvalResult r;
    r.scores = model_scores(model, ds.X);
    const Eigen::Index d_prime = r.scores.rows();
    r.mispair = Matrix::Zero(d_prime, d_prime);
    Eigen::Index correct = 0;
    for (Eigen::Index j = 0; j < ds.sample_count(); ++j) {
        const Eigen::Index predicted = mandy::argmax_label(r.scores.col(j));
        const Eigen::Index truth = ds.label_of(j);
        r.predicted.push_back(predicted);
        if (predicted == truth) ++correct;
        else r.mispair(truth, predicted) += 1.0;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(ds.sample_count());
    return r;
}

Json per_class_metrics(const EvalResult& r, const Dataset& ds) {
    const Eigen::Index d_prime = r.scores.rows();
    std::vector<Eigen::Index> actual(static_cast<std::size_t>(d_prime), 0);
    std::vector<Eigen::Index> predicted(static_cast<std::size_t>(d_prime), 0);
    std::vector<Eigen::Index> hit(static_cast<std::size_t>(d_prime), 0);
    for (Eigen::Index j = 0; j < ds.sample_count(); ++j) {
        const auto t = static_cast<std::size_t>(ds.label_of(j));
        const auto p = static_cast<std::size_t>(r.predicted[static_cast<std::size_t>(j)]);
        ++actual[t];
        ++predicted[p];
        if (t == p) ++hit[t];
    }
    Json per_class = Json::array();
    for (std::size_t i = 0; i < static_cast<std::size_t>(d_prime); ++i) {
        Json c;
        c["class"] = ds.class_names[i];
        c["support"] = actual[i];
        c["precision"] = predicted[i] > 0 ? static_cast<double>(hit[i]) / predicted[i] : 0.0;
        c["recall"] = actual[i] > 0 ? static_cast<double>(hit[i]) / actual[i] : 0.0;
        c["misclassified"] = actual[i] - hit[i];
        per_class.push_back(c);
    }
    return per_class;
}

std::string misclassified_csv(const EvalResult& r, const Dataset& ds) {
    std::string text = "index,true,predicted,no_evidence";
    for (Eigen::Index i = 0; i < r.scores.rows(); ++i) text += ",score_" + std::to_string(i);
    text += "\n";
    for (Eigen::Index j = 0; j < ds.sample_count(); ++j) {
        const Eigen::Index truth = ds.label_of(j);
        const Eigen::Index pred = r.predicted[static_cast<std::size_t>(j)];
        if (pred == truth) continue;
        const bool no_evidence = r.scores.col(j).cwiseAbs().maxCoeff() < kNoEvidenceThreshold;
        text += std::to_string(j) + "," + std::to_string(truth) + "," + std::to_string(pred) + "," +
                (no_evidence ? "1" : "0");
        for (Eigen::Index i = 0; i < r.scores.rows(); ++i) text += "," + format_double(r.scores(i, j));
        text += "\n";
    }
    return text;
}

}  // namespace

void cmd_evaluate(const RunConfig& cfg) {
    cfg.validate();
    ensure_out_dir(cfg);
    Timer total;

    const io::StoredModel model = load_model_checked(cfg);
    const Dataset test = load_input_dataset(cfg, cfg.test_count);
    const EvalResult result = evaluate_on(model, test);

    Json metrics;
    metrics["command"] = "evaluate";
    metrics["config"] = config_json(cfg);
    metrics["test_samples"] = test.sample_count();
    metrics["accuracy"] = result.accuracy;
    metrics["per_class"] = per_class_metrics(result, test);
    Json mispair = Json::array();
    for (Eigen::Index i = 0; i < result.mispair.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < result.mispair.cols(); ++j)
            row.push_back(static_cast<long long>(result.mispair(i, j)));
        mispair.push_back(row);
    }
    metrics["misclassification_pairs"] = mispair;

    const fs::path out_dir(cfg.out_dir);
    write_json(out_dir / "metrics.json", metrics);
    write_labeled_csv(out_dir / "confusion.csv", test.class_names, result.mispair, true);
    write_text_file(out_dir / "misclassified.csv", misclassified_csv(result, test));

    Json timings;
    timings["total"] = total.seconds();
    write_run_info(out_dir, timings);

    std::cout << "accuracy " << result.accuracy << " on " << test.sample_count() << " samples\n";
}

void cmd_confusion(const RunConfig& cfg) {
    cfg.validate();
    ensure_out_dir(cfg);

    const io::StoredModel model = load_model_checked(cfg);
    const Dataset test = load_input_dataset(cfg, cfg.test_count);
    const EvalResult result = evaluate_on(model, test);

    Json metrics;
    metrics["command"] = "confusion";
    metrics["config"] = config_json(cfg);
    metrics["test_samples"] = test.sample_count();
    metrics["accuracy"] = result.accuracy;
    Json counts = Json::array();
    for (Eigen::Index i = 0; i < result.mispair.rows(); ++i)
        counts.push_back(static_cast<long long>(result.mispair.row(i).sum()));
    metrics["misclassified_per_class"] = counts;

    const fs::path out_dir(cfg.out_dir);
    write_json(out_dir / "metrics.json", metrics);
    write_labeled_csv(out_dir / "confusion.csv", test.class_names, result.mispair, true);

    std::cout << "misclassification histogram written for " << test.sample_count() << " samples\n";
}

void cmd_classify(const RunConfig& cfg) {
    cfg.validate();
    ensure_out_dir(cfg);
    if (cfg.images_path.empty()) throw ValidationError("--images is required");

    const io::StoredModel model = load_model_checked(cfg);

    // a single PGM image or the image half of an IDX pair; labels are not needed
    ImageSet images = cfg.images_path.ends_with(".pgm") ? load_pgm_image(cfg.images_path)
                                                        : load_idx_images(cfg.images_path);
    if (cfg.reduce) images = reduce_pool2(images);
    if (cfg.test_count > 0 && cfg.test_count < images.X.cols())
        images.X = images.X.leftCols(cfg.test_count).eval();
    const Matrix& X = images.X;

    const Matrix scores = model_scores(model, X);
    std::string text = "index,predicted,class,no_evidence";
    for (Eigen::Index i = 0; i < scores.rows(); ++i) text += ",score_" + std::to_string(i);
    text += "\n";
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const Eigen::Index label = mandy::argmax_label(scores.col(j));
        const bool no_evidence = scores.col(j).cwiseAbs().maxCoeff() < kNoEvidenceThreshold;
        text += std::to_string(j) + "," + std::to_string(label) + "," +
                model.class_names[static_cast<std::size_t>(label)] + "," + (no_evidence ? "1" : "0");
        for (Eigen::Index i = 0; i < scores.rows(); ++i) text += "," + format_double(scores(i, j));
        text += "\n";
    }
    const fs::path out_dir(cfg.out_dir);
    write_text_file(out_dir / "classifications.csv", text);

    Json metrics;
    metrics["command"] = "classify";
    metrics["config"] = config_json(cfg);
    metrics["samples"] = X.cols();
    write_json(out_dir / "metrics.json", metrics);

    std::cout << "classified " << X.cols() << " images\n";
}

void cmd_sensitivity(const RunConfig& cfg) {
    cfg.validate();
    ensure_out_dir(cfg);

    const io::StoredModel model = load_model_checked(cfg);
    const Eigen::Index height = model.height;
    const Eigen::Index width = model.width;
    const Eigen::Index d = height * width;
    if (d != model.basis().coordinate_count())
        throw ValidationError("model image shape does not match basis dimension");

    // one column per pixel: the constant baseline image with that pixel set to 1
    Matrix X(d, d);
    for (Eigen::Index pixel = 0; pixel < d; ++pixel) {
        X.col(pixel).setConstant(cfg.sensitivity_baseline);
        X(pixel, pixel) = 1.0;
    }
    const Matrix scores = model_scores(model, X);

    const fs::path out_dir(cfg.out_dir);
    const Eigen::Index d_prime = scores.rows();
    for (Eigen::Index label = 0; label < d_prime; ++label) {
        Matrix heat(height, width);
        for (Eigen::Index r = 0; r < height; ++r)
            for (Eigen::Index c = 0; c < width; ++c) heat(r, c) = scores(label, r * width + c);
        const std::string stem = "sensitivity_" + std::to_string(label);
        write_matrix_csv(out_dir / (stem + ".csv"), heat);
        write_pgm(out_dir / (stem + ".pgm"), heat);
    }

    Json metrics;
    metrics["command"] = "sensitivity";
    metrics["config"] = config_json(cfg);
    metrics["labels"] = d_prime;
    metrics["image_height"] = height;
    metrics["image_width"] = width;
    metrics["normalization"] = "csv holds raw values; pgm is min-max normalized per label";
    write_json(out_dir / "metrics.json", metrics);

    std::cout << "wrote " << d_prime << " sensitivity maps (" << height << "x" << width << ")\n";
}

int run(const RunConfig& cfg) noexcept {
    try {
        switch (cfg.command) {
            case Command::Train: cmd_train(cfg); break;
            case Command::Evaluate: cmd_evaluate(cfg); break;
            case Command::Classify: cmd_classify(cfg); break;
            case Command::Sensitivity: cmd_sensitivity(cfg); break;
            case Command::Confusion: cmd_confusion(cfg); break;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "ttclass: error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace ttclass::cli
