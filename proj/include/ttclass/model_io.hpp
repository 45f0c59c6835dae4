#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ttclass/arr.hpp"
#include "ttclass/mandy.hpp"

namespace ttclass::io {

/// On-disk model container: either classifier plus the dataset metadata
/// needed to apply it (image shape, class names). Versioned little-endian
/// binary, magic "TTCM".
struct StoredModel {
    std::optional<mandy::KernelModel> kernel;
    std::optional<arr::TtModel> tt;
    Eigen::Index height{0};
    Eigen::Index width{0};
    std::vector<std::string> class_names;

    [[nodiscard]] bool is_kernel() const { return kernel.has_value(); }
    [[nodiscard]] Eigen::Index class_count() const {
        return static_cast<Eigen::Index>(class_names.size());
    }
    [[nodiscard]] const FeatureBasis& basis() const {
        return is_kernel() ? kernel->basis : tt->basis;
    }
};

/// Kernel models retain the training features, so files can get large;
/// a warning is printed above this payload size.
inline constexpr std::uint64_t kModelSizeWarnBytes = 1ull << 30;

void save_model(const std::string& path, const StoredModel& model);
[[nodiscard]] StoredModel load_model(const std::string& path);

}  // namespace ttclass::io
