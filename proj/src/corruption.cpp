#include "dimest/corruption.hpp"

#include "dimest/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dimest {

PointCloud add_gaussian_noise(const PointCloud& c, double var, std::uint64_t seed) {
    if (var < 0) throw std::invalid_argument("add_gaussian_noise: variance must be >= 0");
    PointCloud out = c;
    if (var == 0) return out;
    Rng rng = Rng::stream(seed, 1);
    const double sd = std::sqrt(var);
    for (Eigen::Index i = 0; i < out.points.rows(); ++i)
        for (Eigen::Index j = 0; j < out.points.cols(); ++j)
            out.points(i, j) += sd * rng.normal();
    return out;
}

PointCloud add_outliers(const PointCloud& c, int n_out, std::uint64_t seed) {
    const Eigen::Index n = c.points.rows();
    if (n_out < 0 || n_out > n)
        throw std::invalid_argument("add_outliers: n_out must be in [0, N]");
    PointCloud out = c;
    if (n_out == 0) return out;
    Rng rng = Rng::stream(seed, 2);
    // distinct indices by partial Fisher-Yates
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int t = 0; t < n_out; ++t) {
        std::uint64_t j = t + rng.below(static_cast<std::uint64_t>(n - t));
        std::swap(idx[t], idx[j]);
    }
    for (int t = 0; t < n_out; ++t)
        for (Eigen::Index jcol = 0; jcol < out.points.cols(); ++jcol)
            out.points(idx[t], jcol) *= rng.uniform(3.0, 6.0);
    return out;
}

} // namespace dimest
