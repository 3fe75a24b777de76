#pragma once

#include "dimest/types.hpp"

#include <cstdint>

namespace dimest {

// i.i.d. N(0, var) added to every coordinate
PointCloud add_gaussian_noise(const PointCloud& c, double var, std::uint64_t seed);

// n_out distinct points are scaled into outliers: every coordinate of a
// chosen point is multiplied by its own fresh Uniform(3, 6) draw.
PointCloud add_outliers(const PointCloud& c, int n_out, std::uint64_t seed);

} // namespace dimest
