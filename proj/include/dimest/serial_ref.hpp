#pragma once

#include "dimest/types.hpp"

namespace dimest::serial_ref {

// Independent serial implementations of the hot kernels, written with plain
// loops (no Eigen expressions, no OpenMP). They serve as cross-checks for the
// parallel kernels in tests and as the baseline in tools/kernel_bench.

Matrix pairwise_distances(const Matrix& X);

NeighborIndex knn_query(const Matrix& X, int k);

int eps_ball_count(const Matrix& X, int i, double eps);

// magnitude |tX| via a hand-rolled Cholesky solve of (e^{-t d_ij}) w = 1
double magnitude(const Matrix& X, double t);

} // namespace dimest::serial_ref
