#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ttclass/errors.hpp"

namespace ttclass {

using Matrix = Eigen::MatrixXd;

/// Image set with one-hot labels. Columns are samples; X entries live in
/// [0, 1] and d == height * width.
struct Dataset {
    Matrix X;  ///< d x m
    Matrix Y;  ///< d' x m, one-hot columns
    Eigen::Index height{0};
    Eigen::Index width{0};
    std::vector<std::string> class_names;

    [[nodiscard]] Eigen::Index sample_count() const { return X.cols(); }
    [[nodiscard]] Eigen::Index pixel_count() const { return X.rows(); }
    [[nodiscard]] Eigen::Index class_count() const { return Y.rows(); }

    /// Label index of sample j (the row holding the 1).
    [[nodiscard]] Eigen::Index label_of(Eigen::Index j) const;
};

[[nodiscard]] std::vector<std::string> digit_class_names();
[[nodiscard]] std::vector<std::string> fashion_class_names();

/// Unlabeled images, one column per sample.
struct ImageSet {
    Matrix X;
    Eigen::Index height{0};
    Eigen::Index width{0};
};

/// Read only the image file of an IDX pair.
[[nodiscard]] ImageSet load_idx_images(const std::string& images_path);

/// Read a single binary 8-bit PGM image (one column in the result).
[[nodiscard]] ImageSet load_pgm_image(const std::string& path);

/// 2x2 mean pooling of unlabeled images.
[[nodiscard]] ImageSet reduce_pool2(const ImageSet& images);

/// Load an IDX image/label file pair (the common handwritten-digit
/// distribution format). Headers are big-endian; pixel bytes are scaled by
/// 1/255. gzip-compressed files are detected by their magic bytes and
/// inflated transparently. Labels one-hot encode into 10 classes.
[[nodiscard]] Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                               std::vector<std::string> class_names = digit_class_names());

/// Write the pair of IDX files (uncompressed) for a dataset; pixel values
/// are mapped back to bytes by rounding x * 255.
void save_idx(const Dataset& ds, const std::string& images_path, const std::string& labels_path);

/// Halve both image dimensions by averaging 2x2 pixel blocks.
/// Requires even height and width; labels pass through.
[[nodiscard]] Dataset reduce_pool2(const Dataset& ds);

/// Deterministic stratified subsample: equal per-class counts where
/// possible, remainder drawn at random; selable order follows the original
/// column order. Throws when count exceeds the sample count.
[[nodiscard]] Dataset subsample(const Dataset& ds, Eigen::Index count, std::uint64_t seed);

/// Debug export: one sample per row, header line first.
void export_csv(const Dataset& ds, std::ostream& out);

}  // namespace ttclass
