#include "dimest/parametric.hpp"

#include "dimest/parallel.hpp"
#include "dimest/rng.hpp"
#include "dimest/special.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dimest {

namespace {

constexpr double NaN = std::numeric_limits<double>::quiet_NaN();

// Collect per-point values, skipping NaN slots; error if too many skipped.
std::vector<double> collect(const std::vector<double>& raw, EstimateReport& rep,
                            const char* who, double max_skip_fraction = 0.1) {
    std::vector<double> kept;
    kept.reserve(raw.size());
    int skipped = 0;
    for (double v : raw)
        (std::isnan(v) ? (void)++skipped : kept.push_back(v));
    if (skipped > 0) {
        rep.diagnostics["skipped_points"] = skipped;
        rep.flag(FLAG_DEGENERATE);
        if (skipped > max_skip_fraction * static_cast<double>(raw.size()))
            throw std::runtime_error(std::string(who) +
                                     ": more than 10% of points degenerate (duplicates?)");
    }
    if (kept.empty()) throw std::runtime_error(std::string(who) + ": no usable points");
    return kept;
}

} // namespace

// ---------------------------------------------------------------- MLE ----
EstimateReport mle_estimate(const PointCloud& cloud, const MleOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    EstimateReport rep;
    std::vector<double> raw(n, NaN);

    if (opt.nbhd.mode == NbhdSpec::Mode::Knn) {
        const int k = opt.nbhd.k;
        if (k < 2) throw std::invalid_argument("mle_estimate: knn form needs k >= 2");
        if (opt.corrected && k < 3)
            throw std::invalid_argument("mle_estimate: corrected form needs k >= 3");
        NeighborIndex nn = knn_query(X, k);
        parallel_for(n, [&](int i) {
            const auto& d = nn.dists[i];
            if (d[0] == 0.0) return; // duplicate
            double s = 0.0;
            for (int j = 0; j < k - 1; ++j) s += std::log(d[k - 1] / d[j]);
            if (s <= 0.0) return;
            raw[i] = (opt.corrected ? k - 2.0 : k - 1.0) / s;
        });
    } else {
        double eps = opt.nbhd.eps > 0 ? opt.nbhd.eps : derive_eps(X, opt.nbhd.k);
        rep.diagnostics["eps"] = eps;
        if (opt.corrected)
            throw std::invalid_argument("mle_estimate: the k-2 correction applies to the knn form");
        const double e2 = eps * eps;
        parallel_for(n, [&](int i) {
            double s = 0.0;
            int cnt = 0;
            bool dup = false;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                double q = (X.row(i) - X.row(j)).squaredNorm();
                if (q >= e2) continue;
                if (q == 0.0) {
                    dup = true;
                    break;
                }
                s += std::log(eps) - 0.5 * std::log(q);
                ++cnt;
            }
            if (dup || cnt == 0 || s <= 0.0) return;
            raw[i] = cnt / s;
        });
    }

    std::vector<double> locals = collect(raw, rep, "mle_estimate");
    rep.estimate = aggregate(locals, opt.agg);
    rep.locals = std::move(locals);
    return rep;
}

// ---------------------------------------------------------------- TLE ----
double tle_skewed_distance(const Eigen::RowVectorXd& q, double r,
                           const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& v) {
    Eigen::RowVectorXd vx = v - x;
    double den = 2.0 * (q - x).dot(vx);
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return r * vx.squaredNorm() / den;
}

EstimateReport tle_estimate(const PointCloud& cloud, const TleOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    const int k = opt.k;
    if (k < 2) throw std::invalid_argument("tle_estimate: k must be >= 2");
    if (opt.epsilon <= 0) throw std::invalid_argument("tle_estimate: epsilon must be positive");
    NeighborIndex nn = knn_query(X, k);

    EstimateReport rep;
    std::vector<double> raw(n, NaN);
    std::vector<long> skipped(n, 0);

    parallel_for(n, [&](int i) {
        const double r = nn.dists[i][k - 1];
        if (r == 0.0) return;
        Eigen::RowVectorXd q = X.row(i);
        double s = 0.0;
        long kept = 0;
        for (int a = 0; a < k; ++a) {
            Eigen::RowVectorXd xa = X.row(nn.ids[i][a]);
            Eigen::RowVectorXd mirror = 2.0 * q - xa;
            for (int b = 0; b < k; ++b) {
                if (b == a) continue;
                Eigen::RowVectorXd vb = X.row(nn.ids[i][b]);
                double d1 = tle_skewed_distance(q, r, xa, vb) / r;
                double d2 = tle_skewed_distance(xa, r, mirror, vb) / r;
                if (!(d1 > opt.epsilon) || !(d2 > opt.epsilon) || !std::isfinite(d1) ||
                    !std::isfinite(d2)) {
                    ++skipped[i];
                    continue;
                }
                s += std::log(d1) + std::log(d2);
                ++kept;
            }
        }
        if (kept == 0 || s >= 0.0) return;
        raw[i] = -2.0 * static_cast<double>(kept) / s;
    });

    long total_skipped = std::accumulate(skipped.begin(), skipped.end(), 0L);
    if (total_skipped > 0) rep.diagnostics["skipped_pairs"] = static_cast<double>(total_skipped);
    std::vector<double> locals = collect(raw, rep, "tle_estimate");
    rep.estimate = aggregate(locals, opt.agg);
    rep.locals = std::move(locals);
    return rep;
}

// -------------------------------------------------------------- TwoNN ----
EstimateReport twonn_estimate(const PointCloud& cloud, const TwonnOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    if (opt.discard_fraction < 0 || opt.discard_fraction >= 1)
        throw std::invalid_argument("twonn_estimate: discard_fraction must be in [0, 1)");
    NeighborIndex nn = knn_query(X, 2);

    EstimateReport rep;
    std::vector<double> mu;
    mu.reserve(n);
    int dup = 0;
    for (int i = 0; i < n; ++i) {
        if (nn.dists[i][0] == 0.0) {
            ++dup;
            continue;
        }
        mu.push_back(nn.dists[i][1] / nn.dists[i][0]);
    }
    if (dup > 0) {
        rep.diagnostics["skipped_points"] = dup;
        rep.flag(FLAG_DEGENERATE);
    }
    const int m = static_cast<int>(mu.size());
    if (m < 3) throw std::runtime_error("twonn_estimate: not enough distinct points");
    std::sort(mu.begin(), mu.end());

    const int keep = m - static_cast<int>(std::floor(opt.discard_fraction * m));
    double sxy = 0.0, sxx = 0.0;
    int infinite = 0;
    for (int i = 1; i <= keep; ++i) {
        double y = -std::log1p(-static_cast<double>(i) / m);
        if (!std::isfinite(y)) { // i == m when nothing is discarded
            ++infinite;
            continue;
        }
        double x = std::log(mu[i - 1]);
        sxy += x * y;
        sxx += x * x;
    }
    if (infinite > 0) {
        rep.diagnostics["dropped_cdf_points"] = infinite;
        rep.flag(FLAG_DEGENERATE);
    }
    if (sxx == 0.0) throw std::runtime_error("twonn_estimate: all ratios equal 1");
    rep.diagnostics["fit_points"] = keep - infinite;
    rep.estimate = sxy / sxx;
    return rep;
}

// -------------------------------------------------------------- GRIDE ----
namespace {

struct GrideSample {
    std::vector<double> logmu; // log(r_{n2}/r_{n1}) per usable point
};

double gride_loglik(const GrideSample& s, int n1, int n2, double d) {
    double ll = 0.0;
    const double c = n2 - n1 - 1.0;
    for (double lm : s.logmu) {
        ll += std::log(d) - (d * n1 + 1.0) * lm;
        if (c > 0.0) ll += c * std::log1p(-std::exp(-d * lm));
    }
    return ll;
}

double gride_score(const GrideSample& s, int n1, int n2, double d) {
    // derivative of the log-likelihood in d
    double g = 0.0;
    const double c = n2 - n1 - 1.0;
    for (double lm : s.logmu) {
        g += 1.0 / d - n1 * lm;
        if (c > 0.0 && lm > 0.0) {
            double a = std::exp(-d * lm);
            g += c * a * lm / (1.0 - a);
        }
    }
    return g;
}

} // namespace

EstimateReport gride_estimate(const PointCloud& cloud, const GrideOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    int n1 = opt.n1;
    int n2 = opt.n2 > 0 ? opt.n2 : opt.multiplier * opt.n1;
    if (n1 < 1 || n2 <= n1) throw std::invalid_argument("gride_estimate: need 1 <= n1 < n2");
    if (n2 > n - 1) throw std::invalid_argument("gride_estimate: n2 exceeds N-1");
    NeighborIndex nn = knn_query(X, n2);

    EstimateReport rep;
    GrideSample s;
    s.logmu.reserve(n);
    int dropped = 0;
    const bool strict = n2 - n1 - 1 > 0; // ties are poles only in this case
    for (int i = 0; i < n; ++i) {
        double a = nn.dists[i][n1 - 1], b = nn.dists[i][n2 - 1];
        if (a == 0.0 || (strict && b == a)) {
            ++dropped;
            continue;
        }
        s.logmu.push_back(std::log(b / a));
    }
    if (dropped > 0) {
        rep.diagnostics["skipped_points"] = dropped;
        rep.flag(FLAG_DEGENERATE);
    }
    if (s.logmu.empty()) throw std::runtime_error("gride_estimate: no usable points");

    double lo = opt.d_lo;
    double hi = opt.d_hi > 0 ? opt.d_hi : 3.0 * static_cast<double>(X.cols());
    if (!(lo > 0 && hi > lo)) throw std::invalid_argument("gride_estimate: bad d range");

    // golden section on t = log d
    const double gr = 0.6180339887498949;
    double a = std::log(lo), b = std::log(hi);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = gride_loglik(s, n1, n2, std::exp(x1));
    double f2 = gride_loglik(s, n1, n2, std::exp(x2));
    for (int it = 0; it < 120 && b - a > 1e-12; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = gride_loglik(s, n1, n2, std::exp(x2));
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = gride_loglik(s, n1, n2, std::exp(x1));
        }
    }
    double d = std::exp(0.5 * (a + b));
    // Newton polish on the score for machine-precision stationarity
    for (int it = 0; it < 8; ++it) {
        double g = gride_score(s, n1, n2, d);
        double h = 0.0;
        const double c = n2 - n1 - 1.0;
        for (double lm : s.logmu) {
            h -= 1.0 / (d * d);
            if (c > 0.0 && lm > 0.0) {
                double aa = std::exp(-d * lm);
                double q = 1.0 - aa;
                h -= c * aa * lm * lm / (q * q);
            }
        }
        if (h == 0.0) break;
        double step = g / h;
        double next = d - step;
        if (next <= 0.0) break;
        d = next;
        if (std::fabs(step) < 1e-14 * (1.0 + d)) break;
    }
    const double span = std::log(hi) - std::log(lo);
    if (std::log(d) - std::log(lo) < 1e-6 * span || std::log(hi) - std::log(d) < 1e-6 * span)
        rep.flag(FLAG_NONCONVERGENT);
    rep.diagnostics["n1"] = n1;
    rep.diagnostics["n2"] = n2;
    rep.estimate = d;
    return rep;
}

// --------------------------------------------------------------- MiND ----
int knn_ratio_ml_integer(const std::vector<double>& rho, int k, int d_cap) {
    if (rho.empty()) throw std::invalid_argument("knn_ratio_ml_integer: empty sample");
    if (d_cap < 1) throw std::invalid_argument("knn_ratio_ml_integer: d_cap must be >= 1");
    double sl = 0.0;
    for (double r : rho) sl += std::log(r);
    int best = 1;
    double bestll = -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(rho.size());
    for (int d = 1; d <= d_cap; ++d) {
        double ll = n * std::log(static_cast<double>(k) * d) + (d - 1.0) * sl;
        if (k > 1)
            for (double r : rho) ll += (k - 1.0) * std::log1p(-std::pow(r, static_cast<double>(d)));
        if (ll > bestll) {
            bestll = ll;
            best = d;
        }
    }
    return best;
}

namespace {

std::vector<double> mind_ratios(const Matrix& X, int k, EstimateReport& rep, const char* who) {
    NeighborIndex nn = knn_query(X, k + 1);
    std::vector<double> rho;
    rho.reserve(X.rows());
    int dropped = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double r1 = nn.dists[i][0], rk = nn.dists[i][k];
        if (r1 == 0.0 || (k > 1 && r1 == rk)) {
            ++dropped;
            continue;
        }
        rho.push_back(r1 / rk);
    }
    if (dropped > 0) {
        rep.diagnostics["skipped_points"] = dropped;
        rep.flag(FLAG_DEGENERATE);
    }
    if (rho.empty()) throw std::runtime_error(std::string(who) + ": no usable points");
    return rho;
}

double mind_score(const std::vector<double>& rho, int k, double d) {
    double g = rho.size() / d;
    for (double r : rho) {
        double lr = std::log(r);
        g += lr;
        if (k > 1) {
            double rd = std::pow(r, d);
            g -= (k - 1.0) * rd * lr / (1.0 - rd);
        }
    }
    return g;
}

} // namespace

EstimateReport mind_estimate(const PointCloud& cloud, const MindOptions& opt) {
    if (opt.k < 1) throw std::invalid_argument("mind_estimate: k must be >= 1");
    if (opt.d_cap < 1) throw std::invalid_argument("mind_estimate: d_cap must be >= 1");
    if (cloud.n() < opt.k + 2) throw std::invalid_argument("mind_estimate: need N >= k+2");
    EstimateReport rep;
    std::vector<double> rho = mind_ratios(cloud.points, opt.k, rep, "mind_estimate");

    if (opt.ver == MindOptions::Ver::MLi) {
        rep.estimate = knn_ratio_ml_integer(rho, opt.k, opt.d_cap);
        return rep;
    }

    // MLk: root of the score, bracketed in (0, d_cap], widened once
    double lo = 1e-3, hi = static_cast<double>(opt.d_cap);
    if (mind_score(rho, opt.k, lo) <= 0.0)
        throw std::runtime_error("mind_estimate: score not positive at the lower bracket");
    if (mind_score(rho, opt.k, hi) > 0.0) {
        hi = 3.0 * opt.d_cap;
        rep.diagnostics["widened_bracket"] = 1.0;
        if (mind_score(rho, opt.k, hi) > 0.0)
            throw std::runtime_error("mind_estimate: no root up to 3 * d_cap; raise d_cap");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (mind_score(rho, opt.k, mid) > 0.0 ? lo : hi) = mid;
    }
    rep.estimate = 0.5 * (lo + hi);
    return rep;
}

// ---------------------------------------------------------------- ESS ----
EstimateReport ess_estimate(const PointCloud& cloud, const EssOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    const int k = opt.k;
    if (k < 2) throw std::invalid_argument("ess_estimate: k must be >= 2");
    NeighborIndex nn = knn_query(X, k);
    const double d_hi = opt.d_hi_factor * static_cast<double>(X.cols());

    EstimateReport rep;
    std::vector<double> raw(n, NaN);
    std::vector<char> clamped(n, 0);
    const long all_pairs = static_cast<long>(k) * (k - 1) / 2;

    parallel_for(n, [&](int i) {
        Matrix V(k, X.cols());
        Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(X.cols());
        for (int t = 0; t < k; ++t) c += X.row(nn.ids[i][t]);
        c /= static_cast<double>(k);
        std::vector<double> norm(k);
        for (int t = 0; t < k; ++t) {
            V.row(t) = X.row(nn.ids[i][t]) - c;
            norm[t] = V.row(t).norm();
        }
        double num = 0.0, den = 0.0;
        auto add_pair = [&](int a, int b) {
            double w = norm[a] * norm[b];
            if (w == 0.0) return; // neighbor coincides with the centroid
            double dot = V.row(a).dot(V.row(b));
            num += std::sqrt(std::max(0.0, w * w - dot * dot));
            den += w;
        };
        if (all_pairs <= opt.max_pairs) {
            for (int a = 0; a < k; ++a)
                for (int b = a + 1; b < k; ++b) add_pair(a, b);
        } else {
            Rng rng = Rng::stream(opt.seed, static_cast<std::uint64_t>(i) + 0xE55);
            for (int t = 0; t < opt.max_pairs; ++t) {
                int a = static_cast<int>(rng.below(k));
                int b = static_cast<int>(rng.below(k - 1));
                if (b >= a) ++b;
                add_pair(std::min(a, b), std::max(a, b));
            }
        }
        if (den == 0.0) return;
        auto [d, hi_clamp] = ess_skewness_inverse(num / den, d_hi);
        raw[i] = d;
        clamped[i] = hi_clamp ? 1 : 0;
    });

    if (std::any_of(clamped.begin(), clamped.end(), [](char c) { return c != 0; }))
        rep.flag(FLAG_THROTTLED);
    if (all_pairs > opt.max_pairs) rep.diagnostics["sampled_pairs"] = opt.max_pairs;
    std::vector<double> locals = collect(raw, rep, "ess_estimate");
    rep.estimate = aggregate(locals, opt.agg);
    rep.locals = std::move(locals);
    return rep;
}

// ------------------------------------------------------------ CorrInt ----
namespace {

struct PairCounts {
    long s1 = 0, s2 = 0;
    double diam = 0.0;
};

PairCounts count_pairs(const Matrix& X, double r1, double r2) {
    const int n = static_cast<int>(X.rows());
    std::vector<long> c1(n, 0), c2(n, 0);
    std::vector<double> dmax(n, 0.0);
    const double q1 = r1 * r1, q2 = r2 * r2;
    parallel_for(n, [&](int i) {
        for (int j = i + 1; j < n; ++j) {
            double q = (X.row(i) - X.row(j)).squaredNorm();
            if (q < q1) ++c1[i];
            if (q < q2) ++c2[i];
            if (q > dmax[i]) dmax[i] = q;
        }
    });
    PairCounts out;
    for (int i = 0; i < n; ++i) {
        out.s1 += c1[i];
        out.s2 += c2[i];
        out.diam = std::max(out.diam, dmax[i]);
    }
    out.diam = std::sqrt(out.diam);
    return out;
}

// scales from neighbor ranks: median over points of r_k
std::pair<double, double> rank_scales(const Matrix& X, int k1, int k2) {
    NeighborIndex nn = knn_query(X, std::max(k1, k2));
    std::vector<double> a(X.rows()), b(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        a[i] = nn.dists[i][k1 - 1];
        b[i] = nn.dists[i][k2 - 1];
    }
    return {median(std::move(a)), median(std::move(b))};
}

} // namespace

EstimateReport corrint_estimate(const PointCloud& cloud, const CorrIntOptions& opt) {
    const Matrix& X = cloud.points;
    EstimateReport rep;
    double r1 = opt.r1, r2 = opt.r2;
    if (r1 <= 0.0 || r2 <= 0.0) {
        if (opt.k1 < 1 || opt.k2 <= opt.k1)
            throw std::invalid_argument("corrint_estimate: need 1 <= k1 < k2");
        if (opt.k2 > X.rows() - 1) throw std::invalid_argument("corrint_estimate: k2 exceeds N-1");
        std::tie(r1, r2) = rank_scales(X, opt.k1, opt.k2);
    }
    if (!(r2 > r1 && r1 > 0.0))
        throw std::runtime_error("corrint_estimate: scales must satisfy 0 < r1 < r2");

    PairCounts pc = count_pairs(X, r1, r2);
    if (pc.s1 == 0) throw std::runtime_error("corrint_estimate: no pairs within the inner scale");
    if (pc.s2 == pc.s1) rep.flag(FLAG_SLOPE_HAZARD);
    rep.diagnostics["r1"] = r1;
    rep.diagnostics["r2"] = r2;
    rep.diagnostics["pairs_r1"] = static_cast<double>(pc.s1);
    rep.diagnostics["pairs_r2"] = static_cast<double>(pc.s2);
    // Eckmann-Ruelle style resolution bound for this sample size and scale
    if (pc.diam > r1)
        rep.diagnostics["resolution_bound"] =
            2.0 * std::log(static_cast<double>(X.rows())) / (std::log(pc.diam) - std::log(r1));
    rep.estimate =
        (std::log(static_cast<double>(pc.s2)) - std::log(static_cast<double>(pc.s1))) /
        (std::log(r2) - std::log(r1));
    return rep;
}

// ------------------------------------------------------------ packing ----
int greedy_packing_number(const Matrix& X, double r) {
    if (r <= 0.0) throw std::invalid_argument("greedy_packing_number: r must be positive");
    const int n = static_cast<int>(X.rows());
    std::vector<int> kept;
    const double r2 = r * r;
    for (int i = 0; i < n; ++i) {
        bool fits = true;
        for (int j : kept)
            if ((X.row(i) - X.row(j)).squaredNorm() < r2) {
                fits = false;
                break;
            }
        if (fits) kept.push_back(i);
    }
    return static_cast<int>(kept.size());
}

int exhaustive_packing_number(const Matrix& X, double r) {
    const int n = static_cast<int>(X.rows());
    if (n > 24) throw std::invalid_argument("exhaustive_packing_number: N too large");
    const double r2 = r * r;
    std::vector<std::uint32_t> conflict(n, 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j != i && (X.row(i) - X.row(j)).squaredNorm() < r2)
                conflict[i] |= 1u << j;
    int best = 0;
    for (std::uint32_t s = 0; s < (1u << n); ++s) {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            if ((s >> i) & 1u)
                if (s & conflict[i]) ok = false;
        if (ok) best = std::max(best, __builtin_popcount(s));
    }
    return best;
}

EstimateReport packing_estimate(const PointCloud& cloud, const PackingOptions& opt) {
    const Matrix& X = cloud.points;
    EstimateReport rep;
    double r1 = opt.r1, r2 = opt.r2;
    if (r1 <= 0.0 || r2 <= 0.0) {
        if (opt.k1 < 1 || opt.k2 <= opt.k1)
            throw std::invalid_argument("packing_estimate: need 1 <= k1 < k2");
        if (opt.k2 > X.rows() - 1) throw std::invalid_argument("packing_estimate: k2 exceeds N-1");
        std::tie(r1, r2) = rank_scales(X, opt.k1, opt.k2);
    }
    if (!(r2 > r1 && r1 > 0.0))
        throw std::runtime_error("packing_estimate: scales must satisfy 0 < r1 < r2");
    int m1 = greedy_packing_number(X, r1);
    int m2 = greedy_packing_number(X, r2);
    rep.diagnostics["r1"] = r1;
    rep.diagnostics["r2"] = r2;
    rep.diagnostics["m1"] = m1;
    rep.diagnostics["m2"] = m2;
    if (m1 == m2) {
        rep.flag(FLAG_SLOPE_HAZARD);
        rep.estimate = 0.0;
        return rep;
    }
    rep.estimate = std::fabs(std::log(static_cast<double>(m2)) - std::log(static_cast<double>(m1))) /
                   (std::log(r2) - std::log(r1));
    return rep;
}

// ----------------------------------------------------------- doubling ----
EstimateReport doubling_estimate(const PointCloud& cloud, const DoublingOptions& opt) {
    const int n = static_cast<int>(cloud.n());
    if (opt.k < 1) throw std::invalid_argument("doubling_estimate: k must be >= 1");
    KnnGraph g = knn_graph(cloud.points, opt.k);
    EstimateReport rep;
    std::vector<double> locals(n);
    std::vector<char> atcap(n, 0);
    const long cap2 = static_cast<long>(opt.k) * (opt.k + 1) + 1;
    parallel_for(n, [&](int i) {
        long b1 = static_cast<long>(graph_ball(g, i, 1).size());
        long b2 = static_cast<long>(graph_ball(g, i, 2).size());
        locals[i] = std::log2(static_cast<double>(b2) / static_cast<double>(b1));
        if (b2 == cap2) atcap[i] = 1;
    });
    if (std::any_of(atcap.begin(), atcap.end(), [](char c) { return c != 0; }))
        rep.flag(FLAG_THROTTLED);
    rep.estimate = aggregate(locals, opt.agg);
    rep.locals = std::move(locals);
    return rep;
}

// ------------------------------------------------------------- WODCap ----
EstimateReport wodcap_estimate(const PointCloud& cloud, const WodcapOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    const int k = opt.k;
    if (k < 2) throw std::invalid_argument("wodcap_estimate: k must be >= 2");
    EstimateReport rep;
    std::vector<double> fr(n);

    if (!opt.graph_lens) {
        NeighborIndex nn = knn_query(X, k);
        parallel_for(n, [&](int i) {
            // second centre is the k-th neighbor: the centre separation then
            // equals the ball radius, the configuration S(d) is derived for;
            // the radius is squared from coordinates so that p's own
            // membership (distance exactly r) never loses to rounding
            const int q = nn.ids[i][k - 1];
            const double r2 = (X.row(i) - X.row(q)).squaredNorm();
            // all k neighbors and the center are within r of the center, so
            // membership only tests the ball at the second centre; the centre
            // itself sits on that ball's boundary, so p and q always count
            int cnt = 1;
            for (int t = 0; t < k; ++t)
                if ((X.row(nn.ids[i][t]) - X.row(q)).squaredNorm() <= r2) ++cnt;
            fr[i] = static_cast<double>(cnt) / (k + 1.0);
        });
    } else {
        KnnGraph g = knn_graph(X, k);
        parallel_for(n, [&](int i) {
            int q = g.out[i][k - 1];
            std::vector<int> bp = graph_ball(g, i, 1), bq = graph_ball(g, q, 1);
            std::vector<int> inter;
            std::set_intersection(bp.begin(), bp.end(), bq.begin(), bq.end(),
                                  std::back_inserter(inter));
            fr[i] = static_cast<double>(inter.size()) / (k + 1.0);
        });
    }

    double frac = aggregate(fr, opt.agg);
    rep.diagnostics["lens_fraction"] = frac;
    if (frac >= cap_fraction(0.0)) {
        rep.flag(FLAG_DEGENERATE);
        rep.estimate = 0.0;
        rep.locals = std::move(fr);
        return rep;
    }
    rep.estimate = cap_fraction_inverse(frac);
    rep.locals = std::move(fr); // per-point lens fractions, not dimensions
    return rep;
}

// --------------------------------------------------------------- IDEA ----
namespace {

double idea_basic(const Matrix& X, int k, EstimateReport* rep, const char* who) {
    const int n = static_cast<int>(X.rows());
    if (k < 1) throw std::invalid_argument(std::string(who) + ": k must be >= 1");
    if (n < k + 2) throw std::invalid_argument(std::string(who) + ": need N >= k+2");
    NeighborIndex nn = knn_query(X, k + 1);
    double s = 0.0;
    long cnt = 0;
    int dropped = 0;
    for (int i = 0; i < n; ++i) {
        double rk = nn.dists[i][k];
        if (rk == 0.0) {
            ++dropped;
            continue;
        }
        for (int j = 0; j < k; ++j) s += nn.dists[i][j] / rk;
        cnt += k;
    }
    if (cnt == 0) throw std::runtime_error(std::string(who) + ": no usable points");
    if (dropped > 0 && rep) {
        rep->diagnostics["skipped_points"] = dropped;
        rep->flag(FLAG_DEGENERATE);
    }
    double m = s / static_cast<double>(cnt);
    if (m >= 1.0) throw std::runtime_error(std::string(who) + ": degenerate ratio mean");
    return m / (1.0 - m);
}

} // namespace

EstimateReport idea_estimate(const PointCloud& cloud, const IdeaOptions& opt) {
    EstimateReport rep;
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    double full = idea_basic(X, opt.k, &rep, "idea_estimate");
    if (!opt.jackknife) {
        rep.estimate = full;
        return rep;
    }

    std::vector<double> ps, ds;
    Rng rng = Rng::stream(opt.seed, 0x1DEA);
    for (double p : opt.p_grid) {
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("idea_estimate: p_grid values must lie in (0,1)");
        std::vector<int> keep;
        for (int i = 0; i < n; ++i)
            if (rng.uniform() < p) keep.push_back(i);
        int kp = std::max(1, static_cast<int>(std::floor(opt.k * std::sqrt(p))));
        if (static_cast<int>(keep.size()) < kp + 2) continue;
        Matrix S(keep.size(), X.cols());
        for (std::size_t t = 0; t < keep.size(); ++t) S.row(t) = X.row(keep[t]);
        ps.push_back(p);
        ds.push_back(idea_basic(S, kp, nullptr, "idea_estimate"));
    }
    ps.push_back(1.0);
    ds.push_back(full);
    if (ps.size() < 5) {
        rep.flag(FLAG_NONCONVERGENT);
        rep.diagnostics["fit_points"] = static_cast<double>(ps.size());
        rep.estimate = full;
        return rep;
    }

    // fit d(p) = a0 - a1 / log2(p n / a2 + a3) by Levenberg-Marquardt
    const double LN2 = 0.6931471805599453;
    Eigen::Vector4d a(full, 1.0, 1.0, 2.0);
    double lambda = 1e-3;
    auto residuals = [&](const Eigen::Vector4d& aa, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
        const int m = static_cast<int>(ps.size());
        r.resize(m);
        if (J) J->resize(m, 4);
        for (int i = 0; i < m; ++i) {
            double g = ps[i] * n / aa(2) + aa(3);
            if (g <= 1.0 + 1e-9) return false; // log2 g must stay positive
            double L = std::log2(g);
            r(i) = aa(0) - aa(1) / L - ds[i];
            if (J) {
                (*J)(i, 0) = 1.0;
                (*J)(i, 1) = -1.0 / L;
                (*J)(i, 2) = -aa(1) / (L * L * g * LN2) * (ps[i] * n / (aa(2) * aa(2)));
                (*J)(i, 3) = aa(1) / (L * L * g * LN2);
            }
        }
        return true;
    };
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    bool converged = false;
    if (residuals(a, r, &J)) {
        double cost = r.squaredNorm();
        for (int it = 0; it < 200; ++it) {
            Eigen::Matrix4d H = J.transpose() * J;
            H.diagonal().array() += lambda;
            Eigen::Vector4d step = H.ldlt().solve(-J.transpose() * r);
            Eigen::Vector4d trial = a + step;
            Eigen::VectorXd rt;
            if ((trial(2) > 0) && residuals(trial, rt, nullptr) && rt.squaredNorm() < cost) {
                a = trial;
                lambda = std::max(1e-12, lambda * 0.3);
                if (!residuals(a, r, &J)) break;
                double nc = r.squaredNorm();
                if (std::fabs(cost - nc) < 1e-9 * (1.0 + cost) && step.norm() < 1e-9 * (1.0 + a.norm())) {
                    cost = nc;
                    converged = true;
                    break;
                }
                cost = nc;
            } else {
                lambda *= 10.0;
                if (lambda > 1e12) break;
            }
        }
    }
    rep.diagnostics["fit_points"] = static_cast<double>(ps.size());
    if (!converged) {
        rep.flag(FLAG_NONCONVERGENT);
        rep.estimate = full;
        return rep;
    }
    rep.diagnostics["a1"] = a(1);
    rep.estimate = a(1) < 0.0 ? full : a(0);
    return rep;
}

// ------------------------------------------------------------- Pettis ----
EstimateReport pettis_estimate(const PointCloud& cloud, const PettisOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    if (opt.k_min < 1 || opt.k_max <= opt.k_min)
        throw std::invalid_argument("pettis_estimate: need 1 <= k_min < k_max");
    if (opt.k_max > n - 1) throw std::invalid_argument("pettis_estimate: k_max exceeds N-1");
    NeighborIndex nn = knn_query(X, opt.k_max);

    // mean over points of the mean distance to the first k neighbors
    std::vector<double> rbar, logk;
    for (int k = opt.k_min; k <= opt.k_max; ++k) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            double t = 0.0;
            for (int j = 0; j < k; ++j) t += nn.dists[i][j];
            s += t / k;
        }
        double v = s / n;
        if (v <= 0.0) throw std::runtime_error("pettis_estimate: zero mean neighbor distance");
        rbar.push_back(std::log(v));
        logk.push_back(std::log(static_cast<double>(k)));
    }
    const int m = static_cast<int>(rbar.size());

    EstimateReport rep;
    double d = 0.0; // current estimate; 0 means "no correction yet"
    double prev = -1.0;
    int iters = 0;
    for (; iters < opt.max_iters; ++iters) {
        // regress y_k = log rbar_k - log G_{k,d} on log k
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (int t = 0; t < m; ++t) {
            int k = opt.k_min + t;
            double corr = 0.0;
            if (d > 0.0)
                corr = std::log(static_cast<double>(k)) / d + std::lgamma(static_cast<double>(k)) -
                       std::lgamma(k + 1.0 / d);
            double y = rbar[t] - corr;
            sx += logk[t];
            sy += y;
            sxx += logk[t] * logk[t];
            sxy += logk[t] * y;
        }
        double denom = m * sxx - sx * sx;
        if (denom == 0.0) throw std::runtime_error("pettis_estimate: degenerate k range");
        double slope = (m * sxy - sx * sy) / denom;
        if (slope <= 0.0)
            throw std::runtime_error("pettis_estimate: nonpositive regression slope");
        double next = 1.0 / slope;
        if (prev >= 0.0 && std::fabs(next - prev) < opt.tol) {
            d = next;
            ++iters;
            break;
        }
        prev = next;
        d = next;
    }
    if (iters >= opt.max_iters) rep.flag(FLAG_NONCONVERGENT);
    rep.diagnostics["iterations"] = iters;
    rep.estimate = d;
    return rep;
}

} // namespace dimest
