#pragma once

#include <cstdint>

#include "ttclass/dataset.hpp"

namespace ttclass {

/// Deterministic synthetic digit set in the same shape as the classic
/// 28x28 handwritten-digit corpora: glyphs rendered with randomized
/// affine warps, stroke thickness, blur, brightness, and pixel noise.
/// Labels cycle through 0..9. Intended for offline end-to-end runs and
/// regression baselines when the real corpora are not on disk.
[[nodiscard]] Dataset make_synthetic_digits(Eigen::Index count, std::uint64_t seed);

}  // namespace ttclass
