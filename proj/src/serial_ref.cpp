#include "dimest/serial_ref.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dimest::serial_ref {

namespace {
double dist(const Matrix& X, int i, int j) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        double d = X(i, c) - X(j, c);
        s += d * d;
    }
    return std::sqrt(s);
}
} // namespace

Matrix pairwise_distances(const Matrix& X) {
    const int n = static_cast<int>(X.rows());
    Matrix D(n, n);
    for (int i = 0; i < n; ++i) {
        D(i, i) = 0.0;
        for (int j = 0; j < i; ++j) D(i, j) = D(j, i) = dist(X, i, j);
    }
    return D;
}

NeighborIndex knn_query(const Matrix& X, int k) {
    const int n = static_cast<int>(X.rows());
    if (k < 1 || k > n - 1) throw std::invalid_argument("serial_ref::knn_query: bad k");
    NeighborIndex out;
    out.k = k;
    out.ids.resize(n);
    out.dists.resize(n);
    std::vector<std::pair<double, int>> cand;
    for (int i = 0; i < n; ++i) {
        cand.clear();
        for (int j = 0; j < n; ++j)
            if (j != i) cand.emplace_back(dist(X, i, j), j);
        std::sort(cand.begin(), cand.end());
        out.ids[i].resize(k);
        out.dists[i].resize(k);
        for (int t = 0; t < k; ++t) {
            out.ids[i][t] = cand[t].second;
            out.dists[i][t] = cand[t].first;
        }
    }
    return out;
}

int eps_ball_count(const Matrix& X, int i, double eps) {
    int c = 0;
    for (int j = 0; j < static_cast<int>(X.rows()); ++j)
        if (j != i && dist(X, i, j) < eps) ++c;
    return c;
}

double magnitude(const Matrix& X, double t) {
    const int n = static_cast<int>(X.rows());
    // A = exp(-t d_ij), solve A w = 1 by Cholesky (A = L L^T)
    std::vector<double> A(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A[static_cast<std::size_t>(i) * n + j] = std::exp(-t * dist(X, i, j));
    for (int j = 0; j < n; ++j) {
        double d = A[static_cast<std::size_t>(j) * n + j];
        for (int p = 0; p < j; ++p) {
            double v = A[static_cast<std::size_t>(j) * n + p];
            d -= v * v;
        }
        if (d <= 0.0) throw std::runtime_error("serial_ref::magnitude: similarity matrix not positive definite");
        d = std::sqrt(d);
        A[static_cast<std::size_t>(j) * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double v = A[static_cast<std::size_t>(i) * n + j];
            for (int p = 0; p < j; ++p)
                v -= A[static_cast<std::size_t>(i) * n + p] * A[static_cast<std::size_t>(j) * n + p];
            A[static_cast<std::size_t>(i) * n + j] = v / d;
        }
    }
    std::vector<double> w(n, 1.0);
    for (int i = 0; i < n; ++i) { // L y = 1
        double v = w[i];
        for (int p = 0; p < i; ++p) v -= A[static_cast<std::size_t>(i) * n + p] * w[p];
        w[i] = v / A[static_cast<std::size_t>(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) { // L^T w = y
        double v = w[i];
        for (int p = i + 1; p < n; ++p) v -= A[static_cast<std::size_t>(p) * n + i] * w[p];
        w[i] = v / A[static_cast<std::size_t>(i) * n + i];
    }
    double s = 0.0;
    for (double x : w) s += x;
    return s;
}

} // namespace dimest::serial_ref
