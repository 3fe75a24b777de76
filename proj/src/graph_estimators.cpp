#include "dimest/graph_estimators.hpp"

#include "dimest/parallel.hpp"
#include "dimest/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dimest {

std::vector<MstEdge> minimum_spanning_tree(const Matrix& X) {
    const int n = static_cast<int>(X.rows());
    if (n < 2) return {};
    std::vector<double> key(n, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n, -1);
    std::vector<char> used(n, 0);
    key[0] = 0.0;
    std::vector<MstEdge> edges;
    edges.reserve(n - 1);
    for (int step = 0; step < n; ++step) {
        int v = -1;
        for (int u = 0; u < n; ++u)
            if (!used[u] && (v == -1 || key[u] < key[v])) v = u;
        used[v] = 1;
        if (parent[v] >= 0)
            edges.push_back({std::min(v, parent[v]), std::max(v, parent[v]), key[v]});
        for (int u = 0; u < n; ++u) {
            if (used[u]) continue;
            double d = std::sqrt((X.row(v) - X.row(u)).squaredNorm());
            if (d < key[u]) {
                key[u] = d;
                parent[u] = v;
            }
        }
    }
    return edges;
}

double mst_alpha_weight(const std::vector<MstEdge>& edges, double alpha) {
    double s = 0.0;
    for (const auto& e : edges) s += std::pow(e.w, alpha);
    return s;
}

double knn_total_length(const Matrix& X, int k) {
    const int n = static_cast<int>(X.rows());
    if (k < 1 || k > n - 1) throw std::invalid_argument("knn_total_length: k must be in [1, N-1]");
    std::vector<double> per(n, 0.0);
    parallel_for(n, [&](int i) {
        // small-k selection without a full sort
        std::vector<double> best(k, std::numeric_limits<double>::infinity());
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double q = (X.row(i) - X.row(j)).squaredNorm();
            if (q < best[k - 1]) {
                int t = k - 1;
                while (t > 0 && best[t - 1] > q) {
                    best[t] = best[t - 1];
                    --t;
                }
                best[t] = q;
            }
        }
        double s = 0.0;
        for (double q : best) s += std::sqrt(q);
        per[i] = s;
    });
    return std::accumulate(per.begin(), per.end(), 0.0);
}

namespace {

struct ScheduleSizes {
    std::vector<int> sizes;       // distinct, ascending
};

ScheduleSizes schedule_sizes(const SubsampleSchedule& s, int n) {
    if (!(s.f_min > 0 && s.f_min <= s.f_max && s.f_max <= 1.0))
        throw std::invalid_argument("subsample schedule: need 0 < f_min <= f_max <= 1");
    if (s.steps < 2) throw std::invalid_argument("subsample schedule: need at least 2 steps");
    if (s.repeats < 1) throw std::invalid_argument("subsample schedule: repeats must be >= 1");
    ScheduleSizes out;
    for (int i = 0; i < s.steps; ++i) {
        double f = s.f_min + (s.f_max - s.f_min) * i / (s.steps - 1);
        int m = static_cast<int>(std::lround(f * n));
        if (m < 16)
            throw std::invalid_argument("subsample schedule: subsamples must keep at least 16 points");
        if (out.sizes.empty() || out.sizes.back() != m) out.sizes.push_back(m);
    }
    if (out.sizes.size() < 2)
        throw std::invalid_argument("subsample schedule: fewer than 2 distinct sizes; widen the range");
    return out;
}

// m distinct indices from [0, n), deterministic per (seed, task)
std::vector<int> draw_subset(int n, int m, std::uint64_t seed, std::uint64_t task) {
    Rng rng = Rng::stream(seed, task);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int t = 0; t < m; ++t) {
        std::uint64_t j = t + rng.below(static_cast<std::uint64_t>(n - t));
        std::swap(idx[t], idx[j]);
    }
    idx.resize(m);
    return idx;
}

struct FitLine {
    double slope, intercept, rss;
};

FitLine ols(const std::vector<double>& x, const std::vector<double>& y) {
    const int m = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double den = m * sxx - sx * sx;
    if (den == 0.0) throw std::runtime_error("ols: degenerate abscissae");
    FitLine f;
    f.slope = (m * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / m;
    f.rss = 0.0;
    for (int i = 0; i < m; ++i) {
        double e = y[i] - f.slope * x[i] - f.intercept;
        f.rss += e * e;
    }
    return f;
}

// shared subsample-growth machinery: stat(subcloud) must map a row subset to
// a positive statistic whose log grows linearly in log n
template <class Stat>
EstimateReport growth_fit(const Matrix& X, const SubsampleSchedule& sched, Stat&& stat,
                          double alpha_over, const char* who) {
    const int n = static_cast<int>(X.rows());
    ScheduleSizes sz = schedule_sizes(sched, n);
    const int S = static_cast<int>(sz.sizes.size());
    std::vector<double> logm(S), ybar(S, 0.0);
    std::vector<double> cell(static_cast<std::size_t>(S) * sched.repeats);

    parallel_for(S * sched.repeats, [&](int task) {
        int s = task / sched.repeats;
        int m = sz.sizes[s];
        std::vector<int> pick = draw_subset(n, m, sched.seed, static_cast<std::uint64_t>(task));
        Matrix sub(m, X.cols());
        for (int t = 0; t < m; ++t) sub.row(t) = X.row(pick[t]);
        cell[task] = stat(sub);
    });

    for (int s = 0; s < S; ++s) {
        logm[s] = std::log(static_cast<double>(sz.sizes[s]));
        double acc = 0.0;
        for (int t = 0; t < sched.repeats; ++t) {
            double v = cell[static_cast<std::size_t>(s) * sched.repeats + t];
            if (!(v > 0.0)) throw std::runtime_error(std::string(who) + ": nonpositive statistic");
            acc += std::log(v);
        }
        ybar[s] = acc / sched.repeats;
    }

    FitLine f = ols(logm, ybar);
    EstimateReport rep;
    rep.diagnostics["slope"] = f.slope;
    rep.diagnostics["fit_rss"] = f.rss;
    rep.diagnostics["sizes"] = S;
    if (f.slope >= 1.0 || std::fabs(1.0 - f.slope) < alpha_over / 100.0) rep.flag(FLAG_SLOPE_HAZARD);
    rep.estimate = alpha_over / (1.0 - f.slope); // verbatim, even when hazardous
    return rep;
}

} // namespace

EstimateReport ph0_estimate(const PointCloud& cloud, const Ph0Options& opt) {
    if (opt.alpha <= 0.0) throw std::invalid_argument("ph0_estimate: alpha must be positive");
    return growth_fit(
        cloud.points, opt.schedule,
        [&](const Matrix& sub) { return mst_alpha_weight(minimum_spanning_tree(sub), opt.alpha); },
        opt.alpha, "ph0_estimate");
}

EstimateReport knn_estimate(const PointCloud& cloud, const KnnFitOptions& opt) {
    if (opt.k < 1) throw std::invalid_argument("knn_estimate: k must be >= 1");
    int min_size = static_cast<int>(std::lround(opt.schedule.f_min * cloud.n()));
    if (opt.k >= min_size)
        throw std::invalid_argument("knn_estimate: k too large for the smallest subsample");
    return growth_fit(
        cloud.points, opt.schedule,
        [&](const Matrix& sub) { return knn_total_length(sub, opt.k); }, 1.0, "knn_estimate");
}

} // namespace dimest
