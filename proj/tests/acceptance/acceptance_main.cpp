// Acceptance suite: runs every release criterion end to end and prints one
// pass/fail line per criterion. Returns the number of failed criteria.
//
// Data: with TTCLASS_MNIST_DIR set and holding the classic IDX file pairs
// (train-images-idx3-ubyte[.gz], train-labels-idx1-ubyte[.gz], t10k-...),
// the desk-scale criteria run on that corpus. Otherwise a deterministic
// synthetic digit set in the same format is generated into the work
// directory (TTCLASS_ACCEPT_WORK, default ./acceptance_work) and reused
// across runs.
//
// The desk-scale regression baseline lives in the source tree
// (tests/baselines/desk_scale.json, override via TTCLASS_BASELINE). On the
// first run it is recorded; later runs must reproduce it within 0.1
// percentage points.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>
#include <json.hpp>

#include "ttclass/arr.hpp"
#include "ttclass/cli.hpp"
#include "ttclass/dataset.hpp"
#include "ttclass/linalg.hpp"
#include "ttclass/mandy.hpp"
#include "ttclass/model_io.hpp"
#include "ttclass/rng.hpp"
#include "ttclass/synth.hpp"

#ifndef TTCLASS_SOURCE_DIR
#define TTCLASS_SOURCE_DIR "."
#endif

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using namespace ttclass;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

Matrix random_unit_data(Index d, Index m, Rng& rng) {
    Matrix X(d, m);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < m; ++j) X(i, j) = rng.uniform();
    return X;
}

Vector explicit_features(const FeatureBasis& basis, const Vector& x) {
    const auto psi = apply_basis(basis, x);
    Vector full(1);
    full << 1.0;
    for (const Vector& factor : psi) {
        Vector next(full.size() * factor.size());
        for (Index a = 0; a < full.size(); ++a)
            for (Index b = 0; b < factor.size(); ++b) next(a * factor.size() + b) = full(a) * factor(b);
        full = std::move(next);
    }
    return full;
}

// ---------------------------------------------------------------- data ---

struct DeskData {
    std::string train_images, train_labels, test_images, test_labels;
    std::string source;  // "mnist" or "synthetic"
};

bool find_idx_pair(const fs::path& dir, const std::string& stem_images,
                   const std::string& stem_labels, std::string& images, std::string& labels) {
    for (const char* suffix : {"", ".gz"}) {
        const fs::path i = dir / (stem_images + suffix);
        const fs::path l = dir / (stem_labels + suffix);
        if (fs::exists(i) && fs::exists(l)) {
            images = i.string();
            labels = l.string();
            return true;
        }
    }
    return false;
}

DeskData desk_data(const fs::path& work) {
    DeskData data;
    if (const char* dir = std::getenv("TTCLASS_MNIST_DIR")) {
        if (find_idx_pair(dir, "train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                          data.train_images, data.train_labels) &&
            find_idx_pair(dir, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte",
                          data.test_images, data.test_labels)) {
            data.source = "mnist";
            return data;
        }
        std::cerr << "note: TTCLASS_MNIST_DIR is set but the IDX pairs were not found; "
                     "falling back to synthetic data\n";
    }

    fs::create_directories(work);
    data.train_images = (work / "synth-train-images-idx3-ubyte").string();
    data.train_labels = (work / "synth-train-labels-idx1-ubyte").string();
    data.test_images = (work / "synth-t10k-images-idx3-ubyte").string();
    data.test_labels = (work / "synth-t10k-labels-idx1-ubyte").string();
    data.source = "synthetic";
    if (!fs::exists(data.train_images) || !fs::exists(data.test_images)) {
        save_idx(make_synthetic_digits(12000, 20250101), data.train_images, data.train_labels);
        save_idx(make_synthetic_digits(10000, 20250202), data.test_images, data.test_labels);
    }
    return data;
}

// ----------------------------------------------------------- criteria ---

Outcome criterion_gram_oracle() {
    const auto start = Clock::now();
    Rng rng(1001);
    double worst_explicit = 0.0, worst_closed = 0.0;
    for (int instance = 0; instance < 50; ++instance) {
        const Index d = 2 + static_cast<Index>(rng.uniform_index(9));   // <= 10
        const Index m = 2 + static_cast<Index>(rng.uniform_index(19));  // <= 20
        const double alpha = instance % 2 == 0 ? 0.59 : M_PI / 2.0;
        const FeatureBasis basis = FeatureBasis::trig(d, alpha);
        const Matrix X = random_unit_data(d, m, rng);
        const Matrix G = mandy::build_gram(build_feature_matrices(basis, X)).values;

        Matrix Psi(static_cast<Index>(1) << d, m);
        for (Index j = 0; j < m; ++j) Psi.col(j) = explicit_features(basis, X.col(j));
        worst_explicit = std::max(worst_explicit, (G - Psi.transpose() * Psi).cwiseAbs().maxCoeff());

        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j) {
                double closed = 1.0;
                for (Index k = 0; k < d; ++k) closed *= std::cos(alpha * (X(k, i) - X(k, j)));
                worst_closed = std::max(worst_closed, std::abs(G(i, j) - closed));
            }
    }
    const double elapsed = seconds_since(start);
    const bool pass = worst_explicit <= 1e-12 && worst_closed <= 1e-12 && elapsed < 10.0;
    return {pass, "explicit-feature err " + fmt(worst_explicit) + ", closed-form err " +
                      fmt(worst_closed) + ", " + fmt(elapsed) + "s on 50 instances"};
}

Outcome criterion_shifted_representation() {
    Rng rng(1002);
    double worst = 0.0;
    for (int instance = 0; instance < 20; ++instance) {
        const Index d = 2 + static_cast<Index>(rng.uniform_index(5));  // <= 6
        const Index m = 1 + static_cast<Index>(rng.uniform_index(5));  // <= 5
        const FeatureBasis basis = FeatureBasis::trig(d, instance % 2 == 0 ? 0.59 : 1.1);
        const Matrix X = random_unit_data(d, m, rng);
        const DenseTensor reference = materialize_psi_hat(basis, X, 0);
        for (Index shift = 1; shift < d; ++shift) {
            const DenseTensor shifted = materialize_psi_hat(basis, X, shift);
            for (std::size_t k = 0; k < reference.values.size(); ++k)
                worst = std::max(worst, std::abs(reference.values[k] - shifted.values[k]));
        }
    }
    return {worst <= 1e-12, "max entry disagreement " + fmt(worst) + " over 20 instances"};
}

Outcome criterion_interpolation(const DeskData& data) {
    Dataset full = load_idx(data.train_images, data.train_labels);
    std::string detail;
    bool pass = true;
    for (const Index m : {60, 600}) {
        const Dataset subset = subsample(full, m, 42);
        const FeatureBasis basis = FeatureBasis::trig(subset.pixel_count(), 0.59);

        const auto gram = mandy::build_gram(build_feature_matrices(basis, subset.X));
        const auto [lambda, U] = linalg::symmetric_eig(gram.values);
        const bool nonsingular = lambda(0) > 1e-12 * lambda(lambda.size() - 1);

        const mandy::KernelModel model = mandy::fit(subset.X, subset.Y, basis, 0.0);
        const Matrix scores = mandy::decision_values(model, subset.X);
        Index correct = 0;
        for (Index j = 0; j < m; ++j)
            if (mandy::argmax_label(scores.col(j)) == subset.label_of(j)) ++correct;

        const double accuracy = static_cast<double>(correct) / static_cast<double>(m);
        pass = pass && nonsingular && accuracy == 1.0;
        detail += "m=" + std::to_string(m) + ": accuracy " + fmt(accuracy) +
                  (nonsingular ? "" : " (gram numerically singular)") + "; ";
    }
    return {pass, detail + "data " + data.source};
}

Outcome criterion_arr_mandy_agreement() {
    Rng rng(1004);
    const Index d = 6, m = 200, held_out = 200, d_prime = 3;
    const double alpha = M_PI / 2.0;

    const auto sample_class = [&rng, d](Index label) {
        Vector x(d);
        for (Index i = 0; i < d; ++i) {
            const double center = 0.2 + 0.3 * static_cast<double>(label) + 0.05 * static_cast<double>(i % 2);
            x(i) = std::clamp(center + 0.13 * rng.normal(), 0.0, 1.0);
        }
        return x;
    };

    Matrix X(d, m), X_test(d, held_out);
    Matrix Y = Matrix::Zero(d_prime, m);
    std::vector<Index> test_labels;
    for (Index j = 0; j < m; ++j) {
        const Index label = j % d_prime;
        X.col(j) = sample_class(label);
        Y(label, j) = 1.0;
    }
    for (Index j = 0; j < held_out; ++j) {
        const Index label = j % d_prime;
        X_test.col(j) = sample_class(label);
        test_labels.push_back(label);
    }

    const FeatureBasis basis = FeatureBasis::trig(d, alpha);
    const mandy::KernelModel kernel = mandy::fit(X, Y, basis, 0.0);
    const Matrix kernel_scores = mandy::decision_values(kernel, X_test);

    arr::ArrConfig config;
    config.rank = 8;  // unrestricted: the maximal feasible rank for d = 6
    config.sweeps = 5;
    config.svd_threshold = 0.0;
    config.seed = 42;
    const arr::TtModel tt = arr::fit(X, Y, basis, config);
    const Matrix tt_scores = arr::decision_values(tt, X_test);

    Index agree = 0;
    for (Index j = 0; j < held_out; ++j)
        if (mandy::argmax_label(kernel_scores.col(j)) == mandy::argmax_label(tt_scores.col(j))) ++agree;
    const double rate = static_cast<double>(agree) / static_cast<double>(held_out);
    return {rate >= 0.95, "argmax agreement " + fmt(100.0 * rate) + "% on " +
                              std::to_string(held_out) + " held-out points"};
}

Outcome criterion_desk_scale(const DeskData& data, const fs::path& work, const fs::path& baseline_path) {
    const auto start = Clock::now();

    cli::RunConfig train_cfg;
    train_cfg.command = cli::Command::Train;
    train_cfg.images_path = data.train_images;
    train_cfg.labels_path = data.train_labels;
    train_cfg.reduce = true;
    train_cfg.train_count = 6000;
    train_cfg.seed = 42;
    train_cfg.workers = 0;

    cli::RunConfig eval_cfg;
    eval_cfg.command = cli::Command::Evaluate;
    eval_cfg.images_path = data.test_images;
    eval_cfg.labels_path = data.test_labels;
    eval_cfg.reduce = true;
    eval_cfg.test_count = 0;  // full test set
    eval_cfg.seed = 42;

    Json measured;
    for (const std::string method : {"mandy", "arr"}) {
        cli::RunConfig cfg = train_cfg;
        cfg.method = method == "mandy" ? cli::Method::Mandy : cli::Method::Arr;
        cfg.out_dir = (work / ("desk_" + method)).string();
        cli::cmd_train(cfg);

        cli::RunConfig eval = eval_cfg;
        eval.model_path = (work / ("desk_" + method) / "model.ttcm").string();
        eval.out_dir = (work / ("desk_" + method + "_eval")).string();
        cli::cmd_evaluate(eval);

        std::ifstream in(fs::path(eval.out_dir) / "metrics.json");
        Json metrics = Json::parse(in);
        measured[method] = metrics["accuracy"];
    }
    const double elapsed = seconds_since(start);

    const double mandy_acc = measured["mandy"].get<double>();
    const double arr_acc = measured["arr"].get<double>();
    std::string detail = "mandy " + fmt(100 * mandy_acc) + "%, arr " + fmt(100 * arr_acc) +
                         "% (6000 train / 10000 test, " + data.source + ", " + fmt(elapsed) + "s)";

    if (mandy_acc < 0.90 || arr_acc < 0.90)
        return {false, detail + "; below the 90% sanity floor"};

    Json store;
    if (fs::exists(baseline_path)) {
        std::ifstream in(baseline_path);
        store = Json::parse(in);
    }
    if (!store.contains(data.source)) {
        store[data.source] = measured;
        fs::create_directories(baseline_path.parent_path());
        std::ofstream out(baseline_path);
        out << store.dump(2) << "\n";
        return {true, detail + "; baseline recorded"};
    }

    const double mandy_base = store[data.source]["mandy"].get<double>();
    const double arr_base = store[data.source]["arr"].get<double>();
    const double mandy_drift = std::abs(mandy_acc - mandy_base) * 100.0;
    const double arr_drift = std::abs(arr_acc - arr_base) * 100.0;
    const bool pass = mandy_drift <= 0.1 && arr_drift <= 0.1;
    return {pass, detail + "; drift vs baseline " + fmt(mandy_drift) + "pp / " + fmt(arr_drift) + "pp"};
}

Outcome criterion_invariants() {
    std::string detail;

    // tensor preservation under orthonormalization
    Rng rng(1006);
    double worst_preserve = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Index p = 3 + static_cast<Index>(rng.uniform_index(3));
        std::vector<Index> dims, ranks{1};
        for (Index mu = 0; mu < p; ++mu) dims.push_back(2 + static_cast<Index>(rng.uniform_index(3)));
        for (Index mu = 1; mu < p; ++mu) ranks.push_back(1 + static_cast<Index>(rng.uniform_index(4)));
        ranks.push_back(1);
        std::vector<TTCore> cores;
        for (Index mu = 0; mu < p; ++mu) {
            TTCore core(ranks[static_cast<std::size_t>(mu)], dims[static_cast<std::size_t>(mu)],
                        ranks[static_cast<std::size_t>(mu + 1)]);
            for (double& v : core.flat()) v = rng.uniform(-1.0, 1.0);
            cores.push_back(std::move(core));
        }
        const TensorTrain tt{std::move(cores)};
        const DenseTensor before = contract_full(tt);
        const DenseTensor left = contract_full(orthonormalize_left(tt, p - 1));
        const DenseTensor right = contract_full(orthonormalize_right(tt, 1));
        for (std::size_t i = 0; i < before.values.size(); ++i) {
            worst_preserve = std::max(worst_preserve, std::abs(before.values[i] - left.values[i]));
            worst_preserve = std::max(worst_preserve, std::abs(before.values[i] - right.values[i]));
        }
    }
    const bool preserve_ok = worst_preserve <= 1e-10;
    detail += "ortho preserve " + fmt(worst_preserve);

    // stack consistency and monotone residuals
    const Index d = 5, m = 50;
    const FeatureBasis basis = FeatureBasis::trig(d, 0.9);
    const Matrix X = random_unit_data(d, m, rng);
    const FeatureMatrixSet feats = build_feature_matrices(basis, X);
    Vector w(m);
    for (Index i = 0; i < m; ++i) w(i) = rng.uniform(-1.0, 1.0);

    arr::ArrConfig config;
    config.rank = 4;
    config.sweeps = 3;
    config.svd_threshold = 0.0;
    arr::SweepState state = arr::make_state(arr::init_guess({2, 2, 2, 2, 2}, config.rank, 5), feats, w);

    double worst_stack = 0.0;
    for (int sweep = 0; sweep < config.sweeps; ++sweep) {
        state = arr::half_sweep_lr(std::move(state), config);
        Matrix P = Matrix::Ones(m, 1);
        for (Index mu = 0; mu < d; ++mu) {
            worst_stack = std::max(
                worst_stack,
                (state.left_stack[static_cast<std::size_t>(mu)] - P).cwiseAbs().maxCoeff());
            P = arr::advance_left(P, feats.factors[static_cast<std::size_t>(mu)], state.xi.core(mu));
        }
        state = arr::half_sweep_rl(std::move(state), config);
        Matrix Q = Matrix::Ones(1, m);
        for (Index mu = d - 1; mu >= 0; --mu) {
            worst_stack = std::max(
                worst_stack,
                (state.right_stack[static_cast<std::size_t>(mu)] - Q).cwiseAbs().maxCoeff());
            Q = arr::advance_right(Q, feats.factors[static_cast<std::size_t>(mu)], state.xi.core(mu));
        }
    }
    const bool stack_ok = worst_stack <= 1e-10;
    detail += ", stack " + fmt(worst_stack);

    double worst_increase = 0.0;
    for (std::size_t i = 1; i < state.residual_log.size(); ++i)
        worst_increase = std::max(worst_increase, state.residual_log[i] - state.residual_log[i - 1]);
    const bool residual_ok = worst_increase <= 1e-9;
    detail += ", residual increase " + fmt(worst_increase);

    // truncated SVD reconstruction error
    Rng rng2(1007);
    double worst_recon = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        Matrix A(15, 9);
        for (Index i = 0; i < A.rows(); ++i)
            for (Index j = 0; j < A.cols(); ++j) A(i, j) = rng2.uniform(-1.0, 1.0);
        Eigen::JacobiSVD<Matrix> full(A);
        const Vector sigma = full.singularValues();
        const Index keep = 1 + static_cast<Index>(rng2.uniform_index(7));
        const double threshold = sigma(keep) / sigma(0) + 1e-13;
        const linalg::TruncatedSvd svd = linalg::truncated_svd(A, threshold);
        if (svd.singular_values.size() != keep) {
            worst_recon = 1.0;
            break;
        }
        const Matrix approx = svd.U * svd.singular_values.asDiagonal() * svd.Vt;
        Eigen::JacobiSVD<Matrix> err(A - approx);
        worst_recon = std::max(worst_recon, std::abs(err.singularValues()(0) - sigma(keep)));
    }
    const bool recon_ok = worst_recon <= 1e-10;
    detail += ", tsvd recon err " + fmt(worst_recon);

    return {preserve_ok && stack_ok && residual_ok && recon_ok, detail};
}

Outcome criterion_sensitivity(const DeskData& data, const fs::path& work) {
    cli::RunConfig train_cfg;
    train_cfg.command = cli::Command::Train;
    train_cfg.images_path = data.train_images;
    train_cfg.labels_path = data.train_labels;
    train_cfg.reduce = true;
    train_cfg.train_count = 600;
    train_cfg.seed = 42;
    train_cfg.out_dir = (work / "sens_model").string();
    cli::cmd_train(train_cfg);

    cli::RunConfig sens_cfg;
    sens_cfg.command = cli::Command::Sensitivity;
    sens_cfg.model_path = (work / "sens_model" / "model.ttcm").string();
    sens_cfg.out_dir = (work / "sens_maps").string();
    cli::cmd_sensitivity(sens_cfg);

    const io::StoredModel model = io::load_model(sens_cfg.model_path);
    const Index height = model.height, width = model.width;
    if (height != 14 || width != 14) return {false, "unexpected map shape"};

    // independent oracle: single-image decision values on perturbed inputs
    double worst = 0.0;
    bool shape_ok = true;
    for (Index label = 0; label < model.class_count(); ++label) {
        std::ifstream in(work / "sens_maps" / ("sensitivity_" + std::to_string(label) + ".csv"));
        if (!in) return {false, "missing sensitivity CSV"};
        std::string line;
        Index r = 0;
        while (std::getline(in, line)) {
            std::istringstream cells(line);
            std::string cell;
            Index c = 0;
            while (std::getline(cells, cell, ',')) {
                Vector x = Vector::Constant(height * width, 0.5);
                x(r * width + c) = 1.0;
                const Vector f = mandy::decision_values(*model.kernel, x);
                worst = std::max(worst, std::abs(std::stod(cell) - f(label)));
                ++c;
            }
            shape_ok = shape_ok && c == width;
            ++r;
        }
        shape_ok = shape_ok && r == height;
    }
    return {worst <= 1e-10 && shape_ok,
            "max |map - direct f| = " + fmt(worst) + " over " +
                std::to_string(model.class_count()) + " maps of 14x14"};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = "acceptance_work";
    if (const char* env = std::getenv("TTCLASS_ACCEPT_WORK")) work = env;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--work") work = argv[i + 1];
    fs::create_directories(work);

    fs::path baseline = fs::path(TTCLASS_SOURCE_DIR) / "tests" / "baselines" / "desk_scale.json";
    if (const char* env = std::getenv("TTCLASS_BASELINE")) baseline = env;

    const DeskData data = desk_data(work);

    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"criterion 1: gram oracle equivalence", [] { return criterion_gram_oracle(); }},
        {"criterion 2: shifted-core representations agree", [] { return criterion_shifted_representation(); }},
        {"criterion 3: training-set interpolation", [&] { return criterion_interpolation(data); }},
        {"criterion 4: arr/mandy agreement", [] { return criterion_arr_mandy_agreement(); }},
        {"criterion 5: desk-scale regression", [&] { return criterion_desk_scale(data, work, baseline); }},
        {"criterion 6: invariant suites", [] { return criterion_invariants(); }},
        {"criterion 7: sensitivity maps", [&] { return criterion_sensitivity(data, work); }},
    };

    int failures = 0;
    for (auto& [name, run] : criteria) {
        Outcome outcome{false, "unhandled exception"};
        try {
            outcome = run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << name << " — " << outcome.detail
                  << std::endl;
        if (!outcome.pass) ++failures;
    }
    return failures;
}
