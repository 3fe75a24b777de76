#include "dimest/magnitude.hpp"

#include "dimest/geometry.hpp"
#include "dimest/parallel.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef __SSE2__
#include <immintrin.h>
#endif

namespace dimest {

namespace {

// deep in the similarity matrix's tail exp(-t d) drops into the denormal
// range, and denormal operands stall the factorization by an order of
// magnitude; couplings at 1e-308 are zero for every purpose here, so the
// solves run with flush-to-zero + denormals-are-zero and restore on exit
class DenormalGuard {
#ifdef __SSE2__
    unsigned csr_;

public:
    DenormalGuard() : csr_(_mm_getcsr()) { _mm_setcsr(csr_ | 0x8040); }
    ~DenormalGuard() { _mm_setcsr(csr_); }
#else
public:
    DenormalGuard() {}
#endif
    DenormalGuard(const DenormalGuard&) = delete;
    DenormalGuard& operator=(const DenormalGuard&) = delete;
};

// only the lower triangle is written: the in-place LLT reads nothing else,
// and the vectorized exp on half the matrix is the curve's second-largest cost
void fill_similarity(const Matrix& D, double t, Eigen::MatrixXd& Z) {
    const Eigen::Index n = D.rows();
    parallel_for(n, [&](int i) {
        Z.row(i).head(i + 1) = (-t * D.row(i).head(i + 1).array()).exp();
    });
}

double solve_total(const Matrix& D, double t, Eigen::MatrixXd& Z) {
    const Eigen::Index n = D.rows();
    fill_similarity(D, t, Z);
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(Z); // factor in place
    if (llt.info() != Eigen::Success) {
        // the failed in-place factorization clobbered Z; rebuild it before
        // asking LDLT how far from positive definite we are
        fill_similarity(D, t, Z);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Z);
        double mind = ldlt.vectorD().minCoeff();
        throw std::runtime_error(
            "magnitude: similarity matrix not positive definite (min pivot " +
            std::to_string(mind) + "); coincident points?");
    }
    Eigen::VectorXd w = llt.solve(Eigen::VectorXd::Ones(n));
    double s = w.sum();
    if (!(s >= 1.0 - 1e-6 * n && s <= n * (1.0 + 1e-9)))
        throw std::runtime_error("magnitude: total weight " + std::to_string(s) +
                                 " escaped [1, N]; conditioning trouble");
    return s;
}

} // namespace

double magnitude(const Matrix& X, double t) {
    if (t <= 0.0) throw std::invalid_argument("magnitude: t must be positive");
    Matrix D = pairwise_distances(X);
    Eigen::MatrixXd Z(D.rows(), D.cols());
    DenormalGuard guard;
    return solve_total(D, t, Z);
}

MagnitudeCurve magnitude_curve(const Matrix& X, const std::vector<double>& ts) {
    Matrix D = pairwise_distances(X);
    Eigen::MatrixXd Z(D.rows(), D.cols());
    MagnitudeCurve out;
    out.t = ts;
    out.value.resize(ts.size());
    DenormalGuard guard;
    for (std::size_t s = 0; s < ts.size(); ++s) {
        if (ts[s] <= 0.0) throw std::invalid_argument("magnitude_curve: t must be positive");
        out.value[s] = solve_total(D, ts[s], Z);
    }
    return out;
}

EstimateReport magnitude_slope_fit(const MagnitudeCurve& curve, const MagnitudeOptions& opt,
                                   double saturation_cap) {
    const int m = static_cast<int>(curve.t.size());
    if (m < opt.min_run + 2)
        throw std::invalid_argument("magnitude_slope_fit: too few grid points for min_run");
    if (curve.value.size() != curve.t.size())
        throw std::invalid_argument("magnitude_slope_fit: t/value size mismatch");
    if (opt.curvature_threshold <= 0)
        throw std::invalid_argument("magnitude_slope_fit: curvature_threshold must be positive");

    const double h = (std::log(curve.t.back()) - std::log(curve.t.front())) / (m - 1);
    if (!(h > 0)) throw std::invalid_argument("magnitude_slope_fit: t grid must increase");
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) y[i] = std::log(curve.value[i]);

    // the finite sample caps |tX| at N, so the curve always ends in a flat
    // plateau with zero slope; that part is the artifact being avoided, not
    // a linear regime, so points at or past 90% of the cap never join a run
    int cand_hi = m;
    for (int i = 0; i < m; ++i)
        if (curve.value[i] >= 0.9 * saturation_cap) {
            cand_hi = i;
            break;
        }

    // second differences on the uniform log grid; interior indices only
    std::vector<char> flat(m, 0);
    for (int i = 1; i + 1 < cand_hi; ++i) {
        double dd = (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h);
        flat[i] = std::fabs(dd) < opt.curvature_threshold ? 1 : 0;
    }
    int best_start = -1, best_len = 0;
    for (int i = 1; i + 1 < m;) {
        if (!flat[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < m && flat[j]) ++j;
        if (j - i > best_len) {
            best_len = j - i;
            best_start = i;
        }
        i = j;
    }
    if (best_start < 0 || best_len < opt.min_run)
        throw std::runtime_error(
            "magnitude: no linear regime of length >= " + std::to_string(opt.min_run) +
            " below curvature threshold " + std::to_string(opt.curvature_threshold) +
            (cand_hi < m ? " ahead of the finite-size plateau" : ""));

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = best_start; i < best_start + best_len; ++i) {
        double xi = std::log(curve.t[i]);
        sx += xi;
        sy += y[i];
        sxx += xi * xi;
        sxy += xi * y[i];
    }
    double den = best_len * sxx - sx * sx;
    double slope = (best_len * sxy - sx * sy) / den;

    EstimateReport rep;
    rep.estimate = slope;
    rep.diagnostics["run_t_lo"] = curve.t[best_start];
    rep.diagnostics["run_t_hi"] = curve.t[best_start + best_len - 1];
    rep.diagnostics["run_points"] = best_len;
    rep.diagnostics["saturation"] = curve.value.back() / saturation_cap; // -> 1 deep in the plateau
    rep.diagnostics["run_value_hi"] = curve.value[best_start + best_len - 1] / saturation_cap;
    // a run pressed against the plateau cutoff means the linear regime was
    // truncated by sample size and the slope is likely an underestimate
    if (cand_hi < m && best_start + best_len - 1 == cand_hi - 2) rep.flag(FLAG_SLOPE_HAZARD);
    return rep;
}

EstimateReport magnitude_dimension(const PointCloud& cloud, const MagnitudeOptions& opt) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    if (opt.t_steps < opt.min_run + 2)
        throw std::invalid_argument("magnitude_dimension: t_steps too small for min_run");
    if (!(opt.t_lo_factor > 0 && opt.t_hi_factor > opt.t_lo_factor))
        throw std::invalid_argument("magnitude_dimension: bad t range");
    if (opt.curvature_threshold <= 0)
        throw std::invalid_argument("magnitude_dimension: curvature_threshold must be positive");

    // convention t* = 1 / median nearest-neighbor distance
    NeighborIndex nn = knn_query(X, 1);
    std::vector<double> r1(n);
    for (int i = 0; i < n; ++i) r1[i] = nn.dists[i][0];
    double med = median(std::move(r1));
    if (med <= 0.0) throw std::runtime_error("magnitude_dimension: median nn distance is zero");
    const double t_star = 1.0 / med;

    std::vector<double> ts(opt.t_steps);
    const double x_lo = std::log(opt.t_lo_factor * t_star);
    const double x_hi = std::log(opt.t_hi_factor * t_star);
    for (int i = 0; i < opt.t_steps; ++i)
        ts[i] = std::exp(x_lo + (x_hi - x_lo) * i / (opt.t_steps - 1));

    EstimateReport rep = magnitude_slope_fit(magnitude_curve(X, ts), opt, n);
    rep.diagnostics["t_star"] = t_star;
    return rep;
}

} // namespace dimest
