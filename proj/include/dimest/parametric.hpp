#pragma once

#include "dimest/geometry.hpp"
#include "dimest/report.hpp"
#include "dimest/types.hpp"

#include <cstdint>
#include <vector>

#include <json.hpp>

namespace dimest {

// ---- Levina-Bickel MLE --------------------------------------------------
struct MleOptions {
    NbhdSpec nbhd;              // knn form needs k >= 2 (>= 3 when corrected)
    bool corrected = false;     // k-2 normalization (asymptotically unbiased)
    Agg agg = Agg::Mean;        // harmonic mean is the usual global estimator
};
// Points with coincident neighbors are skipped and counted; more than 10%
// skipped is an error.
EstimateReport mle_estimate(const PointCloud& cloud, const MleOptions& opt);

// ---- tight local estimator (TLE) ----------------------------------------
struct TleOptions {
    int k = 10;
    double epsilon = 1e-6;      // pairs with skewed-distance ratio <= this are skipped
    Agg agg = Agg::Mean;
};
// skewed distance from v to the sphere of radius r at q, measured along x
double tle_skewed_distance(const Eigen::RowVectorXd& q, double r,
                           const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& v);
EstimateReport tle_estimate(const PointCloud& cloud, const TleOptions& opt);

// ---- TwoNN ---------------------------------------------------------------
struct TwonnOptions {
    double discard_fraction = 0.05; // largest ratios dropped before the fit
};
EstimateReport twonn_estimate(const PointCloud& cloud, const TwonnOptions& opt);

// ---- GRIDE ---------------------------------------------------------------
struct GrideOptions {
    int n1 = 1;
    int n2 = 2;              // 0 means multiplier * n1
    int multiplier = 2;
    double d_lo = 0.1;
    double d_hi = 0.0;       // <= 0: 3 * ambient dimension
};
// Maximum-likelihood fit to mu = r_{n2}/r_{n1}; the log-likelihood is
// concave in log d, maximized by golden section plus a Newton polish.
EstimateReport gride_estimate(const PointCloud& cloud, const GrideOptions& opt);

// ---- MiND ----------------------------------------------------------------
struct MindOptions {
    int k = 1;
    enum class Ver { MLk, MLi } ver = Ver::MLk;
    int d_cap = 10;          // MLk root bracket / MLi argmax range
};
EstimateReport mind_estimate(const PointCloud& cloud, const MindOptions& opt);

// integer maximum-likelihood dimension over 1..d_cap for ratios rho = r_1/r_{k+1};
// shared by MiND (MLi) and DANCo
int knn_ratio_ml_integer(const std::vector<double>& rho, int k, int d_cap);

// ---- DANCo ---------------------------------------------------------------
struct DancoOptions {
    int k = 10;
    int d_cap = 10;
    int calib_reps = 5;
    std::uint64_t calib_seed = 0xDA2C0;
    Agg agg = Agg::Mean; // unused; kept for uniform option handling
};

struct DancoStats {
    double d_ml = 0.0;   // integer ML dimension (real after averaging reps)
    double nu = 0.0;     // mean von Mises location over points
    double tau = 0.0;    // mean von Mises concentration over points
};

struct DancoCalibration {
    int n = 0, k = 0, d_cap = 0, reps = 0;
    std::uint64_t seed = 0;
    std::vector<DancoStats> per_dim; // index i -> calibration for dimension i+1
};

DancoStats danco_stats(const PointCloud& cloud, int k, int d_cap);
DancoCalibration danco_calibrate(int n, int k, int d_cap, int reps, std::uint64_t seed);
nlohmann::json danco_calibration_to_json(const DancoCalibration& c);
DancoCalibration danco_calibration_from_json(const nlohmann::json& j);

// Uses (and fills) a process-wide calibration cache keyed by (n, k, d_cap,
// reps, seed).
EstimateReport danco_estimate(const PointCloud& cloud, const DancoOptions& opt);

// ---- expected simplex skewness (ESS, version a, m = 1) -------------------
struct EssOptions {
    int k = 10;
    int max_pairs = 2000;    // sampled (seeded) beyond this many neighbor pairs
    std::uint64_t seed = 0;
    double d_hi_factor = 3.0; // inversion grid reaches factor * ambient D
    Agg agg = Agg::Mean;
};
EstimateReport ess_estimate(const PointCloud& cloud, const EssOptions& opt);

// ---- correlation integral (Grassberger-Procaccia) ------------------------
struct CorrIntOptions {
    int k1 = 2;              // scales = median k-th neighbor distances
    int k2 = 12;
    double r1 = 0.0;         // explicit radii override the ranks when > 0
    double r2 = 0.0;
};
EstimateReport corrint_estimate(const PointCloud& cloud, const CorrIntOptions& opt);

// ---- packing dimension ----------------------------------------------------
struct PackingOptions {
    int k1 = 2;
    int k2 = 12;
    double r1 = 0.0;
    double r2 = 0.0;
};
// greedy r-separated subset in point-index order
int greedy_packing_number(const Matrix& X, double r);
int exhaustive_packing_number(const Matrix& X, double r); // oracle, small N only
EstimateReport packing_estimate(const PointCloud& cloud, const PackingOptions& opt);

// ---- doubling (graph-ball growth) -----------------------------------------
struct DoublingOptions {
    int k = 10;
    Agg agg = Agg::Mean;
};
EstimateReport doubling_estimate(const PointCloud& cloud, const DoublingOptions& opt);

// ---- winding of density via cap fractions (WODCap) ------------------------
struct WodcapOptions {
    int k = 10;
    Agg agg = Agg::Mean;     // aggregates the lens fractions, not dimensions
    bool graph_lens = false; // knn-graph lens instead of the metric lens
};
EstimateReport wodcap_estimate(const PointCloud& cloud, const WodcapOptions& opt);

// ---- IDEA ------------------------------------------------------------------
struct IdeaOptions {
    int k = 10;
    bool jackknife = false;
    std::vector<double> p_grid = {0.5, 0.6, 0.7, 0.8, 0.9};
    std::uint64_t seed = 0;
};
EstimateReport idea_estimate(const PointCloud& cloud, const IdeaOptions& opt);

// ---- Pettis-Bailey-Jain-Dubes ----------------------------------------------
struct PettisOptions {
    int k_min = 1;
    int k_max = 10;
    double tol = 1e-6;
    int max_iters = 100;
};
EstimateReport pettis_estimate(const PointCloud& cloud, const PettisOptions& opt);

} // namespace dimest
