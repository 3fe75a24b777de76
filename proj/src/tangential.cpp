#include "dimest/tangential.hpp"

#include "dimest/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dimest {

EstimateReport lpca_estimate(const PointCloud& cloud, const LpcaOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    const int D = static_cast<int>(X.cols());
    EstimateReport rep;

    std::vector<double> locals(n);
    std::vector<char> ok(n, 1);
    std::vector<char> capped(n, 0);

    if (opt.nbhd.mode == NbhdSpec::Mode::Knn) {
        const int k = opt.nbhd.k;
        NeighborIndex nn = knn_query(X, k);
        parallel_for(n, [&](int i) {
            Matrix nbhd(k + 1, D);
            nbhd.row(0) = X.row(i);
            for (int t = 0; t < k; ++t) nbhd.row(t + 1) = X.row(nn.ids[i][t]);
            Vector lam = neighborhood_spectrum(nbhd);
            locals[i] = threshold_value(lam, opt.threshold);
            if (locals[i] >= std::min(k, D)) capped[i] = 1;
        });
    } else {
        double eps = opt.nbhd.eps > 0 ? opt.nbhd.eps : derive_eps(X, opt.nbhd.k);
        rep.diagnostics["eps"] = eps;
        parallel_for(n, [&](int i) {
            std::vector<int> members;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                if ((X.row(i) - X.row(j)).squaredNorm() < eps * eps) members.push_back(j);
            }
            if (members.empty()) {
                ok[i] = 0;
                return;
            }
            Matrix nbhd(members.size() + 1, D);
            nbhd.row(0) = X.row(i);
            for (std::size_t t = 0; t < members.size(); ++t) nbhd.row(t + 1) = X.row(members[t]);
            Vector lam = neighborhood_spectrum(nbhd);
            locals[i] = threshold_value(lam, opt.threshold);
            if (locals[i] >= std::min<int>(static_cast<int>(members.size()), D)) capped[i] = 1;
        });
    }

    std::vector<double> kept;
    kept.reserve(n);
    int skipped = 0;
    for (int i = 0; i < n; ++i) {
        if (ok[i])
            kept.push_back(locals[i]);
        else
            ++skipped;
    }
    if (skipped > 0) {
        rep.diagnostics["skipped_points"] = skipped;
        rep.flag(FLAG_DEGENERATE);
        if (skipped * 10 > n)
            throw std::runtime_error("lpca_estimate: radius leaves fewer than 2 points at more than 10% of centers");
    }
    if (std::any_of(capped.begin(), capped.end(), [](char c) { return c != 0; }))
        rep.flag(FLAG_THROTTLED);
    rep.estimate = aggregate(kept, opt.agg);
    rep.locals = std::move(kept);
    return rep;
}

namespace {

// adjacency over direction indices: edge when the pair is mutually obtuse
std::vector<std::vector<char>> obtuse_adjacency(const Matrix& dirs, double tol) {
    const int m = static_cast<int>(dirs.rows());
    std::vector<std::vector<char>> adj(m, std::vector<char>(m, 0));
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) {
            bool e = dirs.row(a).dot(dirs.row(b)) <= tol;
            adj[a][b] = adj[b][a] = e;
        }
    return adj;
}

void expand(const std::vector<std::vector<char>>& adj, std::vector<int>& cand, int cur, int& best) {
    if (cur + static_cast<int>(cand.size()) <= best) return;
    if (cand.empty()) {
        best = std::max(best, cur);
        return;
    }
    while (!cand.empty()) {
        if (cur + static_cast<int>(cand.size()) <= best) return;
        int v = cand.back();
        cand.pop_back();
        std::vector<int> next;
        next.reserve(cand.size());
        for (int u : cand)
            if (adj[v][u]) next.push_back(u);
        expand(adj, next, cur + 1, best);
    }
    best = std::max(best, cur);
}

} // namespace

int max_obtuse_subset_exhaustive(const Matrix& dirs, double tol) {
    const int m = static_cast<int>(dirs.rows());
    if (m == 0) return 0;
    auto adj = obtuse_adjacency(dirs, tol);
    std::vector<int> cand(m);
    std::iota(cand.begin(), cand.end(), 0);
    int best = 0;
    expand(adj, cand, 0, best);
    return best;
}

int max_obtuse_subset_greedy(const Matrix& dirs, double tol, int restarts, Rng& rng) {
    const int m = static_cast<int>(dirs.rows());
    if (m == 0) return 0;
    auto adj = obtuse_adjacency(dirs, tol);
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    int best = 0;
    std::vector<int> chosen;
    for (int r = 0; r < restarts; ++r) {
        for (int i = m - 1; i > 0; --i) {
            int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
            std::swap(perm[i], perm[j]);
        }
        chosen.clear();
        for (int v : perm) {
            bool fits = true;
            for (int u : chosen)
                if (!adj[v][u]) {
                    fits = false;
                    break;
                }
            if (fits) chosen.push_back(v);
        }
        best = std::max(best, static_cast<int>(chosen.size()));
    }
    return best;
}

EstimateReport conical_dimension(const PointCloud& cloud, const CdimOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    const int D = static_cast<int>(X.cols());
    NeighborIndex nn = knn_query(X, opt.k);

    EstimateReport rep;
    std::vector<double> locals(n);
    std::vector<int> dropped(n, 0);
    const bool exhaustive = opt.k <= opt.exhaustive_limit;

    parallel_for(n, [&](int i) {
        Matrix dirs(opt.k, D);
        int m = 0;
        for (int t = 0; t < opt.k; ++t) {
            double len = nn.dists[i][t];
            if (len == 0.0) {
                ++dropped[i];
                continue;
            }
            dirs.row(m++) = (X.row(nn.ids[i][t]) - X.row(i)) / len;
        }
        Matrix d = dirs.topRows(m);
        if (exhaustive)
            locals[i] = max_obtuse_subset_exhaustive(d, opt.tol);
        else {
            Rng rng = Rng::stream(opt.seed, static_cast<std::uint64_t>(i));
            locals[i] = max_obtuse_subset_greedy(d, opt.tol, opt.restarts, rng);
        }
    });

    long total_dropped = std::accumulate(dropped.begin(), dropped.end(), 0L);
    if (total_dropped > 0) {
        rep.diagnostics["dropped_directions"] = static_cast<double>(total_dropped);
        rep.flag(FLAG_DEGENERATE);
    }
    if (!exhaustive) rep.flag(FLAG_APPROXIMATE);
    rep.diagnostics["exhaustive"] = exhaustive ? 1.0 : 0.0;
    rep.estimate = aggregate(locals, opt.agg);
    rep.locals = std::move(locals);
    return rep;
}

} // namespace dimest
