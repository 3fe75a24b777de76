#pragma once

#include "dimest/registry.hpp"
#include "dimest/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace dimest {

// One estimator with one concrete hyperparameter setting. `params` holds only
// the keys the user set; defaults are applied when the cell runs.
struct GridEntry {
    std::string estimator;
    nlohmann::json params;
};

// Cartesian expansion of {key -> candidate values} in declaration order (the
// first key varies slowest), so "first grid order" tie-breaking is stable.
std::vector<GridEntry> expand_grid(const std::string& estimator,
                                   const std::vector<std::pair<std::string, std::vector<nlohmann::json>>>& lists);

struct BenchConfig {
    std::vector<std::string> datasets;
    std::vector<int> sizes{625, 1250, 2500, 5000};
    int runs = 20;
    std::uint64_t seed = 0;
    std::vector<GridEntry> grid;
};

// Line-oriented config:
//   datasets = M1_Sphere, Torus(2,1)
//   sizes    = 625, 1250
//   runs     = 20
//   seed     = 7
//   estimator = mle k={5,10,20} corrected={false,true} agg=hmean
// '#' starts a comment; commas inside parentheses do not split; an estimator
// line expands every key={...} list into its cartesian product.
BenchConfig parse_bench_config(std::istream& in);
BenchConfig parse_bench_config_file(const std::string& path);

struct BenchCell {
    std::string dataset;
    double true_dim = -1.0; // -1: unknown
    int n = 0;
    std::string estimator;
    int grid_index = -1;      // position in BenchConfig::grid
    nlohmann::json params;    // resolved (defaults applied)
    std::vector<double> values; // one per run; NaN marks a failed run
    std::vector<std::string> errors;
    double mean = 0.0, median = 0.0, stddev = 0.0; // over successful runs; NaN if none
};

struct BenchResult {
    BenchConfig config;
    std::vector<BenchCell> cells; // dataset-major, then size, then grid order
};

// Every value is a pure function of (config, seed): clouds are drawn per
// (dataset, size, run) and shared by all grid entries; failures are recorded
// in the cell and never abort the sweep. With one run, stddev is 0 by
// convention.
BenchResult bench_run(const BenchConfig& config);

void bench_to_csv(const BenchResult& r, std::ostream& out);
nlohmann::json bench_to_json(const BenchResult& r);
BenchResult bench_from_json(const nlohmann::json& j);

// ---- hyperparameter selection ---------------------------------------------

struct SelectionChoice {
    int grid_index = -1;
    nlohmann::json params;
    double score = 0.0; // criterion value at the argmin
};

// Per (estimator, n): med_abs/med_rel pick one setting by the median error
// across datasets (absolute resp. relative); best picks per dataset. The
// reported d_* are that setting's benchmark means. Failed cells count as
// infinite error; ties go to the earliest grid entry.
struct SelectionRow {
    std::string estimator;
    int n = 0;
    SelectionChoice med_abs, med_rel;
    std::map<std::string, SelectionChoice> best; // dataset -> choice
    std::map<std::string, double> d_best, d_abs, d_rel;
};

struct SelectionResult {
    std::vector<SelectionRow> rows; // estimator-major (grid order), then size
};

SelectionResult select_hyperparams(const BenchResult& r);
void selection_to_csv(const SelectionResult& s, std::ostream& out);
nlohmann::json selection_to_json(const SelectionResult& s);

// ---- noise sweep -----------------------------------------------------------

struct NoiseConfig {
    int n = 2500;
    int runs = 20;
    std::uint64_t seed = 0;
    std::vector<double> gaussian_sds{0.0, 0.01, 0.1, 1.0}; // noise std dev per coordinate
    std::vector<int> outlier_counts{0, 25, 125, 250};
    std::vector<GridEntry> grid; // candidate settings per estimator
};

struct NoiseCell {
    std::string dataset;
    double true_dim = 0.0;
    std::string kind;  // "gaussian" | "outliers"
    double level = 0.0; // noise std dev, or outlier count
    std::string estimator;
    nlohmann::json params;
    std::vector<double> values;
    std::vector<std::string> errors;
    double mean = 0.0, median = 0.0, stddev = 0.0;
};

struct NoiseResult {
    NoiseConfig config;
    std::map<std::string, SelectionChoice> chosen; // estimator -> setting
    std::vector<NoiseCell> cells;
};

// Corruption robustness on three spheres-and-rotations clouds (a 6-sphere
// zero-padded into R^11, a 10-sphere in R^11, and SO(4) in R^16) at a fixed
// sample count. Each estimator first gets one hyperparameter setting, chosen
// from its grid to minimize |mean - 10| on the clean 10-sphere; that setting
// is then swept over Gaussian noise levels (standard deviations) and outlier
// counts. Level 0 applies no corruption, so the two sweeps share their clean
// cells' values.
NoiseResult noise_experiment(const NoiseConfig& config);

void noise_to_csv(const NoiseResult& r, std::ostream& out);
nlohmann::json noise_to_json(const NoiseResult& r);

// ---- curvature: paraboloid pointwise ----------------------------------------

struct ParaboloidConfig {
    std::vector<double> b_grid{0.5, 0.65, 0.8, 1.0, 1.3, 1.8, 2.6, 4.0};
    bool negative = false;          // z = 2x^2 - y^2/b^2 instead of +
    std::string estimator = "lpca"; // "lpca" (FO) or "mle"
    double alpha = 0.05;            // lpca threshold
    bool corrected = false;         // mle variant
    int k_min = 20, k_max = 165, k_step = 5;
    int reps = 0;     // 0 picks 1500 for lpca, 150 for mle
    int base_count = 10000; // samples at b=1; other b keep the same per-area density
    std::uint64_t seed = 0;
};

struct ParaboloidRow {
    double b = 0.0, kappa2 = 0.0; // second principal curvature at the origin
    int k = 0;
    double mean = 0.0, stddev = 0.0; // lpca: share of reps estimating 2; mle: estimate
};

struct ParaboloidSummary {
    double b = 0.0, kappa2 = 0.0;
    int n = 0;                          // per-rep sample count
    double mean_count = 0.0, sd_count = 0.0;     // #k values estimating 2
    double mean_largest = 0.0, sd_largest = 0.0; // largest such k (0 when none)
};

struct ParaboloidResult {
    ParaboloidConfig config;
    std::vector<ParaboloidRow> rows;       // (b, k) grid
    std::vector<ParaboloidSummary> summary; // per b; lpca only
};

// Pointwise dimension at the origin of z = 2x^2 +- y^2/b^2: each rep draws a
// fresh cloud, takes the sample nearest the origin as the query, and sweeps k
// over one sorted neighbor scan.
ParaboloidResult paraboloid_pointwise(const ParaboloidConfig& config);
void paraboloid_to_csv(const ParaboloidResult& r, std::ostream& out);

// ---- curvature: torus overestimation CDF -----------------------------------

struct TorusCdfConfig {
    double R = 2.0, r = 1.0;
    int n = 10000;
    std::string estimator = "lpca"; // any estimator reporting locals
    nlohmann::json params;          // e.g. {"k": 40}
    std::uint64_t seed = 0;
};

struct TorusPointRow {
    double phi = 0.0; // tube angle; pi is the inner rim
    double t = 0.0;   // |phi - pi|
    int over = 0;     // round(local estimate) == 3
};

struct TorusCdfResult {
    TorusCdfConfig config;
    std::vector<TorusPointRow> points; // sorted by t
    int n_over = 0;
    double ks_stat = 0.0; // one-sample KS of flagged t against the area CDF
    double ks_p = 1.0;
};

TorusCdfResult torus_overestimate_cdf(const TorusCdfConfig& config);
void torus_to_csv(const TorusCdfResult& r, std::ostream& out);

// CDF of t = |phi - pi| under area-uniform sampling: (R t - r sin t)/(pi R)
double torus_angle_area_cdf(double t, double R, double r);

// Kolmogorov-Smirnov: max |F_emp - F| on a sorted sample, and the asymptotic
// tail probability Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
// evaluated at lambda = (sqrt(m) + 0.12 + 0.11/sqrt(m)) * D.
double ks_statistic_sorted(const std::vector<double>& sorted_sample,
                           const std::vector<double>& cdf_at_sample);
double ks_asymptotic_p(double lambda);

} // namespace dimest
