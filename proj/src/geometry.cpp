#include "dimest/geometry.hpp"

#include "dimest/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace dimest {

Matrix pairwise_distances(const Matrix& X) {
    const Eigen::Index n = X.rows();
    Matrix D(n, n);
    parallel_for(n, [&](int i) {
        D(i, i) = 0.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            // fill the full row of i from scratch so each index writes only
            // its own row; (a-b) and (b-a) square to identical sums
            D(i, j) = std::sqrt((X.row(i) - X.row(j)).squaredNorm());
        }
    });
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) D(j, i) = D(i, j);
    return D;
}

namespace {

template <class DistRow>
void knn_of_row(Eigen::Index n, int i, int k, DistRow&& sqdist,
                std::vector<int>& ids, std::vector<double>& ds) {
    // partial selection on (squared distance, index); sqrt at the end
    std::vector<std::pair<double, int>> cand;
    cand.reserve(n - 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (static_cast<int>(j) == i) continue;
        cand.emplace_back(sqdist(j), static_cast<int>(j));
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    ids.resize(k);
    ds.resize(k);
    for (int t = 0; t < k; ++t) {
        ids[t] = cand[t].second;
        ds[t] = std::sqrt(cand[t].first);
    }
}

} // namespace

NeighborIndex knn_query(const Matrix& X, int k) {
    const Eigen::Index n = X.rows();
    if (k < 1 || k > n - 1)
        throw std::invalid_argument("knn_query: k must be in [1, N-1], got k=" + std::to_string(k) +
                                    " with N=" + std::to_string(n));
    NeighborIndex out;
    out.k = k;
    out.ids.resize(n);
    out.dists.resize(n);
    parallel_for(n, [&](int i) {
        knn_of_row(n, i, k, [&](Eigen::Index j) { return (X.row(i) - X.row(j)).squaredNorm(); },
                   out.ids[i], out.dists[i]);
    });
    return out;
}

NeighborIndex knn_from_distances(const Matrix& D, int k) {
    const Eigen::Index n = D.rows();
    if (D.cols() != n) throw std::invalid_argument("knn_from_distances: matrix must be square");
    if (k < 1 || k > n - 1)
        throw std::invalid_argument("knn_from_distances: k must be in [1, N-1], got k=" +
                                    std::to_string(k) + " with N=" + std::to_string(n));
    NeighborIndex out;
    out.k = k;
    out.ids.resize(n);
    out.dists.resize(n);
    parallel_for(n, [&](int i) {
        knn_of_row(n, i, k, [&](Eigen::Index j) { double d = D(i, j); return d * d; },
                   out.ids[i], out.dists[i]);
    });
    return out;
}

int eps_ball_count(const Matrix& X, int i, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("eps_ball_count: eps must be positive");
    const double e2 = eps * eps;
    int c = 0;
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
        if (static_cast<int>(j) == i) continue;
        if ((X.row(i) - X.row(j)).squaredNorm() < e2) ++c;
    }
    return c;
}

double distance_ratio(const NeighborIndex& nn, int p, int i, int j) {
    if (i < 1 || i > nn.k || j < 1 || j > nn.k)
        throw std::invalid_argument("distance_ratio: orders must be in [1, k]");
    double rj = nn.dists[p][j - 1];
    if (rj == 0.0) throw std::runtime_error("distance_ratio: zero denominator (duplicate points)");
    return nn.dists[p][i - 1] / rj;
}

KnnGraph knn_graph(const Matrix& X, int k) {
    NeighborIndex nn = knn_query(X, k);
    KnnGraph g;
    g.k = k;
    g.out = std::move(nn.ids);
    g.w = std::move(nn.dists);
    return g;
}

std::vector<int> graph_ball(const KnnGraph& g, int i, int r) {
    const int n = static_cast<int>(g.out.size());
    std::vector<char> seen(n, 0);
    std::vector<int> frontier{i}, ball{i};
    seen[i] = 1;
    for (int step = 0; step < r; ++step) {
        std::vector<int> next;
        for (int v : frontier)
            for (int w : g.out[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    next.push_back(w);
                    ball.push_back(w);
                }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    std::sort(ball.begin(), ball.end());
    return ball;
}

long duplicate_pair_count(const Matrix& X) {
    // hash rows, then confirm collisions exactly
    const Eigen::Index n = X.rows();
    std::unordered_map<std::size_t, std::vector<int>> buckets;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t h = 1469598103934665603ull;
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
            double v = X(i, c);
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            h = (h ^ bits) * 1099511628211ull;
        }
        buckets[h].push_back(static_cast<int>(i));
    }
    long pairs = 0;
    for (auto& [h, idx] : buckets) {
        if (idx.size() < 2) continue;
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a + 1; b < idx.size(); ++b)
                if (X.row(idx[a]) == X.row(idx[b])) ++pairs;
    }
    return pairs;
}

double derive_eps(const Matrix& X, int k) {
    NeighborIndex nn = knn_query(X, k);
    std::vector<double> rk(nn.dists.size());
    for (std::size_t i = 0; i < rk.size(); ++i) rk[i] = nn.dists[i].back();
    return median(std::move(rk));
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty vector");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty vector");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Agg agg_from_string(const std::string& s) {
    if (s == "mean") return Agg::Mean;
    if (s == "hmean") return Agg::HMean;
    if (s == "median") return Agg::Median;
    throw std::invalid_argument("unknown aggregation '" + s + "' (expected mean|hmean|median)");
}

std::string agg_to_string(Agg a) {
    switch (a) {
        case Agg::Mean: return "mean";
        case Agg::HMean: return "hmean";
        default: return "median";
    }
}

double aggregate(const std::vector<double>& v, Agg a) {
    if (v.empty()) throw std::runtime_error("aggregate: no local estimates survived");
    switch (a) {
        case Agg::Mean: return mean(v);
        case Agg::Median: return median(v);
        case Agg::HMean: {
            double s = 0.0;
            for (double x : v) {
                if (x <= 0.0) throw std::runtime_error("aggregate: harmonic mean needs positive values");
                s += 1.0 / x;
            }
            return static_cast<double>(v.size()) / s;
        }
    }
    return 0.0;
}

} // namespace dimest
