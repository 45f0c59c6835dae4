#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ttclass/errors.hpp"

namespace ttclass {

using Index = Eigen::Index;

/// Dense multi-way array in row-major order (last index fastest).
/// Used for small materializations and test oracles only.
struct DenseTensor {
    std::vector<double> values;
    std::vector<Index> dims;

    [[nodiscard]] Index size() const {
        Index n = 1;
        for (Index d : dims) n *= d;
        return n;
    }

    [[nodiscard]] Index flat_index(const std::vector<Index>& idx) const {
        if (idx.size() != dims.size())
            throw ValidationError("DenseTensor: index order mismatch");
        Index flat = 0;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (idx[k] < 0 || idx[k] >= dims[k])
                throw ValidationError("DenseTensor: index out of range");
            flat = flat * dims[k] + idx[k];
        }
        return flat;
    }

    double operator()(const std::vector<Index>& idx) const { return values[flat_index(idx)]; }
    double& operator()(const std::vector<Index>& idx) { return values[flat_index(idx)]; }
};

}  // namespace ttclass
