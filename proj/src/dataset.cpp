#include "ttclass/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <zlib.h>

#include "ttclass/detail/binary_io.hpp"
#include "ttclass/rng.hpp"

namespace ttclass {

namespace {

constexpr std::uint32_t kImagesMagic = 0x0000'0803;  // unsigned byte, 3 dimensions
constexpr std::uint32_t kLabelsMagic = 0x0000'0801;  // unsigned byte, 1 dimension
constexpr Eigen::Index kClassCount = 10;

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

bool is_gzip(const std::vector<unsigned char>& bytes) {
    return bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b;
}

std::vector<unsigned char> gunzip(const std::vector<unsigned char>& bytes, const std::string& path) {
    z_stream strm{};
    if (inflateInit2(&strm, 16 + MAX_WBITS) != Z_OK) throw IoError("zlib init failed for " + path);
    std::vector<unsigned char> out;
    out.reserve(bytes.size() * 4);
    std::vector<unsigned char> buffer(1 << 16);
    strm.next_in = const_cast<unsigned char*>(bytes.data());
    strm.avail_in = static_cast<uInt>(bytes.size());
    int status = Z_OK;
    while (status != Z_STREAM_END) {
        strm.next_out = buffer.data();
        strm.avail_out = static_cast<uInt>(buffer.size());
        status = inflate(&strm, Z_NO_FLUSH);
        if (status != Z_OK && status != Z_STREAM_END) {
            inflateEnd(&strm);
            throw IoError("gzip decompression failed for " + path);
        }
        out.insert(out.end(), buffer.data(), buffer.data() + (buffer.size() - strm.avail_out));
    }
    inflateEnd(&strm);
    return out;
}

std::uint32_t read_u32_be(const std::vector<unsigned char>& bytes, std::size_t offset,
                          const std::string& path) {
    if (offset + 4 > bytes.size()) throw IoError("truncated IDX file: " + path);
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

}  // namespace

Eigen::Index Dataset::label_of(Eigen::Index j) const {
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
        if (Y(i, j) == 1.0) return i;
    throw ValidationError("Dataset: column without one-hot label");
}

std::vector<std::string> digit_class_names() {
    return {"0", "1", "2", "3", "4", "5", "6", "7", "8", "9"};
}

std::vector<std::string> fashion_class_names() {
    return {"T-shirt/top", "Trousers", "Pullover", "Dress",   "Coat",
            "Sandal",      "Shirt",    "Sneaker",  "Bag",     "Ankle boot"};
}

ImageSet load_idx_images(const std::string& images_path) {
    std::vector<unsigned char> img = read_file_bytes(images_path);
    if (is_gzip(img)) img = gunzip(img, images_path);
    if (read_u32_be(img, 0, images_path) != kImagesMagic)
        throw IoError("bad IDX magic in " + images_path + " (expected 0x00000803)");

    ImageSet set;
    const auto m = static_cast<Eigen::Index>(read_u32_be(img, 4, images_path));
    set.height = static_cast<Eigen::Index>(read_u32_be(img, 8, images_path));
    set.width = static_cast<Eigen::Index>(read_u32_be(img, 12, images_path));
    const Eigen::Index d = set.height * set.width;
    if (static_cast<std::size_t>(16 + m * d) > img.size())
        throw IoError("truncated IDX file: " + images_path);
    set.X.resize(d, m);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < d; ++i)
            set.X(i, j) = static_cast<double>(img[static_cast<std::size_t>(16 + j * d + i)]) / 255.0;
    return set;
}

ImageSet load_pgm_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError("unsupported image format in " + path + " (expected binary PGM)");
    long width = 0, height = 0, maxval = 0;
    in >> width >> height >> maxval;
    if (!in || width < 1 || height < 1 || maxval < 1 || maxval > 255)
        throw IoError("malformed PGM header in " + path);
    in.get();  // single whitespace after maxval
    ImageSet set;
    set.height = height;
    set.width = width;
    set.X.resize(height * width, 1);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(height * width));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw IoError("truncated PGM file: " + path);
    for (Eigen::Index i = 0; i < set.X.rows(); ++i)
        set.X(i, 0) = static_cast<double>(bytes[static_cast<std::size_t>(i)]) / static_cast<double>(maxval);
    return set;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 std::vector<std::string> class_names) {
    ImageSet images = load_idx_images(images_path);
    std::vector<unsigned char> lab = read_file_bytes(labels_path);
    if (is_gzip(lab)) lab = gunzip(lab, labels_path);
    if (read_u32_be(lab, 0, labels_path) != kLabelsMagic)
        throw IoError("bad IDX magic in " + labels_path + " (expected 0x00000801)");

    const Eigen::Index m = images.X.cols();
    const auto m_labels = static_cast<Eigen::Index>(read_u32_be(lab, 4, labels_path));
    if (m != m_labels)
        throw IoError("image count " + std::to_string(m) + " does not match label count " +
                      std::to_string(m_labels));
    if (static_cast<std::size_t>(8 + m) > lab.size())
        throw IoError("truncated IDX file: " + labels_path);

    Dataset ds;
    ds.height = images.height;
    ds.width = images.width;
    ds.class_names = std::move(class_names);
    ds.X = std::move(images.X);
    ds.Y = Matrix::Zero(kClassCount, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const unsigned char label = lab[static_cast<std::size_t>(8 + j)];
        if (label >= kClassCount)
            throw IoError("label byte " + std::to_string(label) + " out of range in " + labels_path);
        ds.Y(label, j) = 1.0;
    }
    return ds;
}

void save_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path) {
    const Eigen::Index m = ds.sample_count();
    const Eigen::Index d = ds.pixel_count();
    {
        std::ofstream out(images_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + images_path);
        detail::write_be<std::uint32_t>(out, kImagesMagic);
        detail::write_be<std::uint32_t>(out, static_cast<std::uint32_t>(m));
        detail::write_be<std::uint32_t>(out, static_cast<std::uint32_t>(ds.height));
        detail::write_be<std::uint32_t>(out, static_cast<std::uint32_t>(ds.width));
        std::vector<unsigned char> bytes(static_cast<std::size_t>(m * d));
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index i = 0; i < d; ++i)
                bytes[static_cast<std::size_t>(j * d + i)] =
                    static_cast<unsigned char>(std::lround(std::clamp(ds.X(i, j), 0.0, 1.0) * 255.0));
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + images_path);
    }
    {
        std::ofstream out(labels_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + labels_path);
        detail::write_be<std::uint32_t>(out, kLabelsMagic);
        detail::write_be<std::uint32_t>(out, static_cast<std::uint32_t>(m));
        for (Eigen::Index j = 0; j < m; ++j)
            out.put(static_cast<char>(ds.label_of(j)));
        if (!out) throw IoError("write failed: " + labels_path);
    }
}

namespace {

Matrix pool2_columns(const Matrix& X, Eigen::Index height, Eigen::Index width) {
    if (height % 2 != 0 || width % 2 != 0)
        throw ValidationError("reduce_pool2: image dimensions must be even");
    const Eigen::Index h2 = height / 2;
    const Eigen::Index w2 = width / 2;
    Matrix out(h2 * w2, X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index r = 0; r < h2; ++r)
            for (Eigen::Index c = 0; c < w2; ++c) {
                const double sum = X(2 * r * width + 2 * c, j) + X(2 * r * width + 2 * c + 1, j) +
                                   X((2 * r + 1) * width + 2 * c, j) +
                                   X((2 * r + 1) * width + 2 * c + 1, j);
                out(r * w2 + c, j) = sum / 4.0;
            }
    return out;
}

}  // namespace

Dataset reduce_pool2(const Dataset& ds) {
    Dataset out;
    out.X = pool2_columns(ds.X, ds.height, ds.width);
    out.height = ds.height / 2;
    out.width = ds.width / 2;
    out.class_names = ds.class_names;
    out.Y = ds.Y;
    return out;
}

ImageSet reduce_pool2(const ImageSet& images) {
    ImageSet out;
    out.X = pool2_columns(images.X, images.height, images.width);
    out.height = images.height / 2;
    out.width = images.width / 2;
    return out;
}

Dataset subsample(const Dataset& ds, Eigen::Index count, std::uint64_t seed) {
    const Eigen::Index m = ds.sample_count();
    if (count > m) throw ValidationError("subsample: requested more samples than available");
    if (count < 0) throw ValidationError("subsample: negative count");

    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(ds.class_count()));
    for (Eigen::Index j = 0; j < m; ++j)
        by_class[static_cast<std::size_t>(ds.label_of(j))].push_back(j);

    Rng rng(seed);
    // portable Fisher-Yates (std::shuffle is implementation-defined)
    const auto shuffle_indices = [&rng](std::vector<Eigen::Index>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng.uniform_index(i)]);
    };
    for (auto& indices : by_class) shuffle_indices(indices);

    // equal share per class first, leftovers drawn from the remaining pool
    const Eigen::Index share = count / ds.class_count();
    std::vector<Eigen::Index> chosen;
    std::vector<Eigen::Index> pool;
    for (auto& indices : by_class) {
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(share), indices.size());
        chosen.insert(chosen.end(), indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(take));
        pool.insert(pool.end(), indices.begin() + static_cast<std::ptrdiff_t>(take), indices.end());
    }
    shuffle_indices(pool);
    while (static_cast<Eigen::Index>(chosen.size()) < count) {
        chosen.push_back(pool.back());
        pool.pop_back();
    }
    std::sort(chosen.begin(), chosen.end());

    Dataset out;
    out.height = ds.height;
    out.width = ds.width;
    out.class_names = ds.class_names;
    out.X.resize(ds.pixel_count(), count);
    out.Y.resize(ds.class_count(), count);
    for (Eigen::Index j = 0; j < count; ++j) {
        out.X.col(j) = ds.X.col(chosen[static_cast<std::size_t>(j)]);
        out.Y.col(j) = ds.Y.col(chosen[static_cast<std::size_t>(j)]);
    }
    return out;
}

void export_csv(const Dataset& ds, std::ostream& out) {
    out << "label";
    for (Eigen::Index i = 0; i < ds.pixel_count(); ++i) out << ",p" << i;
    out << "\n";
    char buf[32];
    for (Eigen::Index j = 0; j < ds.sample_count(); ++j) {
        out << ds.label_of(j);
        for (Eigen::Index i = 0; i < ds.pixel_count(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.X(i, j));
            out << ',' << buf;
        }
        out << "\n";
    }
}

}  // namespace ttclass
