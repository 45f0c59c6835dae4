#include "ttclass/tensor_train.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>

#include "ttclass/detail/binary_io.hpp"
#include "ttclass/linalg.hpp"

namespace ttclass {

namespace {

// Relative cutoff below which singular values count as zero during
// orthonormalization sweeps.
constexpr double kOrthoSvCutoff = 1e-14;

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

TTCore::TTCore(Index r_prev, Index n, Index r_next)
    : r_prev_(r_prev), n_(n), r_next_(r_next) {
    if (r_prev < 1 || n < 1 || r_next < 1)
        throw ValidationError("TTCore: all dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(r_prev * n * r_next), 0.0);
}

Matrix TTCore::slice(Index i) const {
    Matrix s(r_prev_, r_next_);
    for (Index k = 0; k < r_prev_; ++k)
        for (Index l = 0; l < r_next_; ++l) s(k, l) = (*this)(k, i, l);
    return s;
}

bool TTCore::is_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Unfolding left_unfold(const TTCore& core) {
    // Flat layout (k_prev, i, k_next) with k_next fastest is exactly the
    // row-major left unfolding.
    RowMajorMap map(core.flat().data(), core.r_prev() * core.n(), core.r_next());
    return Unfolding{Matrix(map), UnfoldKind::Left};
}

Unfolding right_unfold(const TTCore& core) {
    RowMajorMap map(core.flat().data(), core.r_prev(), core.n() * core.r_next());
    return Unfolding{Matrix(map), UnfoldKind::Right};
}

TTCore fold(const Unfolding& u, Index r_prev, Index n, Index r_next) {
    TTCore core(r_prev, n, r_next);
    if (u.kind == UnfoldKind::Left) {
        if (u.matrix.rows() != r_prev * n || u.matrix.cols() != r_next)
            throw ValidationError("fold: left unfolding shape mismatch");
        for (Index k = 0; k < r_prev; ++k)
            for (Index i = 0; i < n; ++i)
                for (Index l = 0; l < r_next; ++l) core(k, i, l) = u.matrix(k * n + i, l);
    } else {
        if (u.matrix.rows() != r_prev || u.matrix.cols() != n * r_next)
            throw ValidationError("fold: right unfolding shape mismatch");
        for (Index k = 0; k < r_prev; ++k)
            for (Index i = 0; i < n; ++i)
                for (Index l = 0; l < r_next; ++l) core(k, i, l) = u.matrix(k, i * r_next + l);
    }
    return core;
}

TensorTrain::TensorTrain(std::vector<TTCore> cores) : cores_(std::move(cores)) {
    if (cores_.empty()) throw ValidationError("TensorTrain: needs at least one core");
    if (cores_.front().r_prev() != 1 || cores_.back().r_next() != 1)
        throw ValidationError("TensorTrain: boundary ranks must be 1");
    for (std::size_t mu = 0; mu + 1 < cores_.size(); ++mu)
        if (cores_[mu].r_next() != cores_[mu + 1].r_prev())
            throw ValidationError("TensorTrain: adjacent ranks do not match");
    for (const TTCore& c : cores_)
        if (!c.is_finite()) throw ValidationError("TensorTrain: non-finite core entries");
}

std::vector<Index> TensorTrain::mode_dims() const {
    std::vector<Index> dims;
    dims.reserve(cores_.size());
    for (const TTCore& c : cores_) dims.push_back(c.n());
    return dims;
}

std::vector<Index> TensorTrain::ranks() const {
    std::vector<Index> r;
    r.reserve(cores_.size() + 1);
    r.push_back(cores_.front().r_prev());
    for (const TTCore& c : cores_) r.push_back(c.r_next());
    return r;
}

TensorTrain TensorTrain::with_core(Index mu, TTCore core) const {
    std::vector<TTCore> cores = cores_;
    cores.at(static_cast<std::size_t>(mu)) = std::move(core);
    return TensorTrain(std::move(cores));
}

TensorTrain orthonormalize_left(const TensorTrain& tt, Index upto) {
    const Index p = tt.order();
    if (upto < 0 || upto > p - 1)
        throw ValidationError("orthonormalize_left: upto must lie in [0, order-1]");
    std::vector<TTCore> cores = tt.cores();
    for (Index mu = 0; mu < upto; ++mu) {
        const TTCore& c = cores[static_cast<std::size_t>(mu)];
        const linalg::TruncatedSvd svd = linalg::truncated_svd(left_unfold(c).matrix, kOrthoSvCutoff);
        const Index rank = svd.singular_values.size();
        cores[static_cast<std::size_t>(mu)] =
            fold(Unfolding{svd.U, UnfoldKind::Left}, c.r_prev(), c.n(), rank);
        // absorb Sigma V^T into the next core
        Matrix carry = svd.singular_values.asDiagonal() * svd.Vt;
        const TTCore& next = cores[static_cast<std::size_t>(mu + 1)];
        Matrix absorbed = carry * right_unfold(next).matrix;
        cores[static_cast<std::size_t>(mu + 1)] =
            fold(Unfolding{std::move(absorbed), UnfoldKind::Right}, rank, next.n(), next.r_next());
    }
    return TensorTrain(std::move(cores));
}

TensorTrain orthonormalize_right(const TensorTrain& tt, Index downto) {
    const Index p = tt.order();
    if (downto < 1 || downto > p)
        throw ValidationError("orthonormalize_right: downto must lie in [1, order]");
    std::vector<TTCore> cores = tt.cores();
    for (Index mu = p - 1; mu >= downto; --mu) {
        const TTCore& c = cores[static_cast<std::size_t>(mu)];
        // SVD of the right unfolding; V^T rows become the new core, U Sigma
        // is absorbed into the previous core.
        const linalg::TruncatedSvd svd = linalg::truncated_svd(right_unfold(c).matrix, kOrthoSvCutoff);
        const Index rank = svd.singular_values.size();
        cores[static_cast<std::size_t>(mu)] =
            fold(Unfolding{svd.Vt, UnfoldKind::Right}, rank, c.n(), c.r_next());
        Matrix carry = svd.U * Matrix(svd.singular_values.asDiagonal());
        const TTCore& prev = cores[static_cast<std::size_t>(mu - 1)];
        Matrix absorbed = left_unfold(prev).matrix * carry;
        cores[static_cast<std::size_t>(mu - 1)] =
            fold(Unfolding{std::move(absorbed), UnfoldKind::Left}, prev.r_prev(), prev.n(), rank);
    }
    return TensorTrain(std::move(cores));
}

DenseTensor contract_full(const TensorTrain& tt, Index cap) {
    const std::vector<Index> dims = tt.mode_dims();
    Index total = 1;
    for (Index d : dims) {
        if (total > cap / d) throw ValidationError("contract_full: dense materialization cap exceeded");
        total *= d;
    }

    // Running contraction: rows enumerate the already-materialized mode
    // indices (row-major), columns the current rank.
    Matrix acc = Matrix::Ones(1, 1);
    for (Index mu = 0; mu < tt.order(); ++mu) {
        const TTCore& c = tt.core(mu);
        // (rows * n, r_next) from (rows, r_prev) x core
        Matrix next(acc.rows() * c.n(), c.r_next());
        for (Index i = 0; i < c.n(); ++i) {
            Matrix s = c.slice(i);  // r_prev x r_next
            Matrix block = acc * s;
            for (Index row = 0; row < acc.rows(); ++row) next.row(row * c.n() + i) = block.row(row);
        }
        acc = std::move(next);
    }

    DenseTensor out;
    out.dims = dims;
    out.values.assign(static_cast<std::size_t>(total), 0.0);
    for (Index idx = 0; idx < total; ++idx) out.values[static_cast<std::size_t>(idx)] = acc(idx, 0);
    return out;
}

Vector evaluate(const TensorTrain& tt, const std::vector<Vector>& features) {
    const Index p = tt.order();
    const Index fed = static_cast<Index>(features.size());
    if (fed != p && fed != p - 1)
        throw ValidationError("evaluate: need one feature vector per mode (optionally excluding a trailing label mode)");
    for (Index mu = 0; mu < fed; ++mu)
        if (features[static_cast<std::size_t>(mu)].size() != tt.core(mu).n())
            throw ValidationError("evaluate: feature vector length does not match mode dimension");

    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (Index mu = 0; mu < fed; ++mu) {
        const TTCore& c = tt.core(mu);
        const Vector& f = features[static_cast<std::size_t>(mu)];
        Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(c.r_next());
        for (Index i = 0; i < c.n(); ++i) next += f(i) * (v * c.slice(i));
        v = std::move(next);
    }
    if (fed == p) return v.transpose();  // length r_p == 1

    // trailing label mode: contract the rank index, leave the mode open
    const TTCore& label_core = tt.core(p - 1);
    Vector out = Vector::Zero(label_core.n());
    for (Index i = 0; i < label_core.n(); ++i) out(i) = (v * label_core.slice(i))(0, 0);
    return out;
}

TensorTrain direct_sum_labels(const std::vector<TensorTrain>& parts) {
    if (parts.empty()) throw ValidationError("direct_sum_labels: no parts");
    const Index d_prime = static_cast<Index>(parts.size());
    const std::vector<Index> dims = parts.front().mode_dims();
    const Index p = static_cast<Index>(dims.size());
    for (const TensorTrain& part : parts)
        if (part.mode_dims() != dims)
            throw ValidationError("direct_sum_labels: parts must share mode dimensions");

    std::vector<TTCore> cores;
    cores.reserve(static_cast<std::size_t>(p + 1));
    for (Index mu = 0; mu < p; ++mu) {
        Index r_prev_total = 0, r_next_total = 0;
        for (const TensorTrain& part : parts) {
            r_prev_total += part.core(mu).r_prev();
            r_next_total += part.core(mu).r_next();
        }
        // first core: parts share the single boundary row, stack along columns
        if (mu == 0) r_prev_total = 1;
        TTCore core(r_prev_total, dims[static_cast<std::size_t>(mu)], r_next_total);
        Index k_off = 0, l_off = 0;
        for (const TensorTrain& part : parts) {
            const TTCore& c = part.core(mu);
            for (Index k = 0; k < c.r_prev(); ++k)
                for (Index i = 0; i < c.n(); ++i)
                    for (Index l = 0; l < c.r_next(); ++l)
                        core((mu == 0 ? 0 : k_off + k), i, l_off + l) = c(k, i, l);
            k_off += c.r_prev();
            l_off += c.r_next();
        }
        cores.push_back(std::move(core));
    }

    // label core: picks the i-th block's scalar; shape (d', d', 1)
    TTCore label_core(d_prime, d_prime, 1);
    for (Index i = 0; i < d_prime; ++i) label_core(i, i, 0) = 1.0;
    cores.push_back(std::move(label_core));
    return TensorTrain(std::move(cores));
}

void save_tensor_train(std::ostream& out, const TensorTrain& tt) {
    out.write("TTC1", 4);
    detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(tt.order()));
    for (const TTCore& c : tt.cores()) {
        detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(c.r_prev()));
        detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(c.n()));
        detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(c.r_next()));
    }
    for (const TTCore& c : tt.cores())
        for (double v : c.flat()) detail::write_le<double>(out, v);
    if (!out) throw IoError("save_tensor_train: write failed");
}

TensorTrain load_tensor_train(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "TTC1")
        throw IoError("load_tensor_train: bad magic (expected TTC1)");
    const auto p = detail::read_le<std::uint64_t>(in);
    if (p == 0 || p > 1'000'000) throw IoError("load_tensor_train: implausible core count");
    std::vector<std::array<std::uint64_t, 3>> shapes(p);
    for (auto& s : shapes) {
        s[0] = detail::read_le<std::uint64_t>(in);
        s[1] = detail::read_le<std::uint64_t>(in);
        s[2] = detail::read_le<std::uint64_t>(in);
    }
    std::vector<TTCore> cores;
    cores.reserve(p);
    for (const auto& s : shapes) {
        TTCore core(static_cast<Index>(s[0]), static_cast<Index>(s[1]), static_cast<Index>(s[2]));
        for (double& v : core.flat()) v = detail::read_le<double>(in);
        cores.push_back(std::move(core));
    }
    return TensorTrain(std::move(cores));
}

}  // namespace ttclass
