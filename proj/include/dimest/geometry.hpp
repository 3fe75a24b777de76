#pragma once

#include "dimest/types.hpp"

namespace dimest {

// Full symmetric distance matrix. O(N^2 D) time, O(N^2) memory; callers that
// only need neighbors should use knn_query instead.
Matrix pairwise_distances(const Matrix& X);

// k nearest neighbors by brute force, self excluded. Ties broken by smaller
// index. Throws std::invalid_argument unless 1 <= k <= N-1.
NeighborIndex knn_query(const Matrix& X, int k);

// Same contract, but reads a precomputed distance matrix.
NeighborIndex knn_from_distances(const Matrix& D, int k);

// number of points strictly within eps of X.row(i), excluding i itself
int eps_ball_count(const Matrix& X, int i, double eps);

// r_i(p) / r_j(p) from a neighbor index (1-based neighbor orders)
double distance_ratio(const NeighborIndex& nn, int p, int i, int j);

// directed knn graph built from knn_query
KnnGraph knn_graph(const Matrix& X, int k);

// Vertices within r hops of i along directed out-edges, including i.
// r = 0 gives {i}; r = 1 gives {i} plus its out-neighbors.
std::vector<int> graph_ball(const KnnGraph& g, int i, int r);

// indices i<j with exactly equal coordinates; used for degeneracy flags
long duplicate_pair_count(const Matrix& X);

// median of a copy of v; midpoint of the two central order statistics
double median(std::vector<double> v);

// sample standard deviation (n-1 denominator); 0 for n < 2
double sample_std(const std::vector<double>& v);

double mean(const std::vector<double>& v);

// Neighborhood selection for the estimators that accept either form.
// Eps mode with eps <= 0 derives the radius as the median k-th neighbor
// distance over all points.
struct NbhdSpec {
    enum class Mode { Knn, Eps } mode = Mode::Knn;
    int k = 10;
    double eps = 0.0;
};

double derive_eps(const Matrix& X, int k);

enum class Agg { Mean, HMean, Median };

Agg agg_from_string(const std::string& s);
std::string agg_to_string(Agg a);

// Aggregate local estimates. HMean requires strictly positive values
// (throws std::runtime_error otherwise).
double aggregate(const std::vector<double>& v, Agg a);

} // namespace dimest
