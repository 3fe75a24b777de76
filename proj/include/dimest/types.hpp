#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dimest {

// Points are rows. Row-major storage so a point is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct CloudMeta {
    std::string name;                // generator name, empty for loaded data
    std::optional<int> true_dim;     // intrinsic dimension if known
    std::uint64_t seed = 0;
};

struct PointCloud {
    Matrix points;                   // N x D
    CloudMeta meta;

    Eigen::Index n() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
};

// k nearest neighbors of each point, self excluded, sorted by (distance, index).
struct NeighborIndex {
    int k = 0;
    std::vector<std::vector<int>> ids;        // per point, k neighbor indices
    std::vector<std::vector<double>> dists;   // matching distances, nondecreasing
};

// directed knn graph: out-edges of i are its k nearest neighbors
struct KnnGraph {
    int k = 0;
    std::vector<std::vector<int>> out;
    std::vector<std::vector<double>> w;
};

} // namespace dimest
