#include "ttclass/model_io.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>

#include "ttclass/detail/binary_io.hpp"

namespace ttclass::io {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kMethodKernel = 0;
constexpr std::uint8_t kMethodTt = 1;
constexpr std::uint8_t kBasisTrig = 0;

void write_string(std::ostream& out, const std::string& s) {
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const auto len = detail::read_le<std::uint32_t>(in);
    if (len > (1u << 20)) throw IoError("model file: implausible string length");
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw IoError("model file: truncated string");
    return s;
}

void write_matrix(std::ostream& out, const Matrix& M) {
    detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(M.rows()));
    detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(M.cols()));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) detail::write_le<double>(out, M(i, j));
}

Matrix read_matrix(std::istream& in) {
    const auto rows = detail::read_le<std::uint64_t>(in);
    const auto cols = detail::read_le<std::uint64_t>(in);
    if (rows * cols > (1ull << 33)) throw IoError("model file: implausible matrix size");
    Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = detail::read_le<double>(in);
    return M;
}

}  // namespace

void save_model(const std::string& path, const StoredModel& model) {
    if (model.is_kernel() == model.tt.has_value())
        throw ValidationError("save_model: exactly one classifier must be present");
    const FeatureBasis& basis = model.basis();
    if (basis.kind() != FeatureBasis::Kind::TrigAlpha)
        throw ValidationError("save_model: only trig-basis models are serializable");

    std::ostringstream buf(std::ios::binary);
    buf.write("TTCM", 4);
    detail::write_le<std::uint32_t>(buf, kVersion);
    detail::write_le<std::uint8_t>(buf, model.is_kernel() ? kMethodKernel : kMethodTt);
    detail::write_le<std::uint8_t>(buf, kBasisTrig);
    detail::write_le<double>(buf, basis.alpha());
    detail::write_le<std::uint64_t>(buf, static_cast<std::uint64_t>(basis.coordinate_count()));
    detail::write_le<std::uint64_t>(buf, static_cast<std::uint64_t>(model.height));
    detail::write_le<std::uint64_t>(buf, static_cast<std::uint64_t>(model.width));
    detail::write_le<std::uint64_t>(buf, static_cast<std::uint64_t>(model.class_names.size()));
    for (const std::string& name : model.class_names) write_string(buf, name);

    if (model.is_kernel()) {
        const mandy::KernelModel& km = *model.kernel;
        detail::write_le<double>(buf, km.ridge_used);
        write_matrix(buf, km.Z);
        detail::write_le<std::uint64_t>(buf,
                                        static_cast<std::uint64_t>(km.training_features.factors.size()));
        for (const Matrix& F : km.training_features.factors) write_matrix(buf, F);
    } else {
        const arr::TtModel& tm = *model.tt;
        detail::write_le<std::uint64_t>(buf, static_cast<std::uint64_t>(tm.config.rank));
        detail::write_le<std::uint64_t>(buf, static_cast<std::uint64_t>(tm.config.sweeps));
        detail::write_le<double>(buf, tm.config.svd_threshold);
        detail::write_le<std::uint64_t>(buf, tm.config.seed);
        detail::write_le<double>(buf, tm.config.tol);
        detail::write_le<std::uint64_t>(buf, static_cast<std::uint64_t>(tm.parts.size()));
        for (const TensorTrain& part : tm.parts) save_tensor_train(buf, part);
    }

    const std::string payload = buf.str();
    if (payload.size() > kModelSizeWarnBytes)
        std::cerr << "ttclass: warning: model file " << path << " is "
                  << payload.size() / (1024.0 * 1024.0 * 1024.0)
                  << " GiB (kernel models retain the training features)\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file " + path);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("model file write failed: " + path);
}

StoredModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file " + path);

    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "TTCM")
        throw IoError("bad model magic in " + path + " (expected TTCM)");
    const auto version = detail::read_le<std::uint32_t>(in);
    if (version != kVersion)
        throw IoError("unsupported model version " + std::to_string(version) + " in " + path);

    const auto method = detail::read_le<std::uint8_t>(in);
    const auto basis_kind = detail::read_le<std::uint8_t>(in);
    if (basis_kind != kBasisTrig) throw IoError("unsupported basis kind in " + path);
    const double alpha = detail::read_le<double>(in);
    const auto p = detail::read_le<std::uint64_t>(in);

    StoredModel model;
    model.height = static_cast<Eigen::Index>(detail::read_le<std::uint64_t>(in));
    model.width = static_cast<Eigen::Index>(detail::read_le<std::uint64_t>(in));
    const auto n_classes = detail::read_le<std::uint64_t>(in);
    if (n_classes > 4096) throw IoError("model file: implausible class count");
    for (std::uint64_t i = 0; i < n_classes; ++i) model.class_names.push_back(read_string(in));

    const FeatureBasis basis = FeatureBasis::trig(static_cast<Eigen::Index>(p), alpha);

    if (method == kMethodKernel) {
        const double ridge = detail::read_le<double>(in);
        Matrix Z = read_matrix(in);
        const auto n_factors = detail::read_le<std::uint64_t>(in);
        if (n_factors != p) throw IoError("model file: factor count does not match basis");
        FeatureMatrixSet feats;
        for (std::uint64_t i = 0; i < n_factors; ++i) feats.factors.push_back(read_matrix(in));
        model.kernel = mandy::KernelModel{std::move(Z), std::move(feats), basis, ridge};
    } else if (method == kMethodTt) {
        arr::ArrConfig config;
        config.rank = static_cast<Eigen::Index>(detail::read_le<std::uint64_t>(in));
        config.sweeps = static_cast<int>(detail::read_le<std::uint64_t>(in));
        config.svd_threshold = detail::read_le<double>(in);
        config.seed = detail::read_le<std::uint64_t>(in);
        config.tol = detail::read_le<double>(in);
        const auto n_parts = detail::read_le<std::uint64_t>(in);
        if (n_parts != n_classes) throw IoError("model file: part count does not match classes");
        std::vector<TensorTrain> parts;
        parts.reserve(n_parts);
        for (std::uint64_t i = 0; i < n_parts; ++i) parts.push_back(load_tensor_train(in));
        TensorTrain assembled = direct_sum_labels(parts);
        model.tt = arr::TtModel{std::move(parts), std::move(assembled), basis, config};
    } else {
        throw IoError("unsupported method tag in " + path);
    }
    return model;
}

}  // namespace ttclass::io
