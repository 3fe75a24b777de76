#pragma once

#include "dimest/report.hpp"
#include "dimest/types.hpp"

#include <vector>

namespace dimest {

// Magnitude |tX| of the scaled cloud: the total of the weight vector solving
// (e^{-t d_ij}) w = 1. The similarity matrix is positive definite for
// distinct points, so the solve is a Cholesky factorization done in place.
double magnitude(const Matrix& X, double t);

struct MagnitudeCurve {
    std::vector<double> t;
    std::vector<double> value; // 1 <= |tX| <= N, increasing toward N
};

// Evaluates the curve reusing one distance matrix and one similarity buffer;
// O(N^2) memory, one O(N^3) solve per t.
MagnitudeCurve magnitude_curve(const Matrix& X, const std::vector<double>& ts);

struct MagnitudeOptions {
    int t_steps = 60;
    double t_lo_factor = 0.05;       // grid spans [lo, hi] * (1 / median nn distance)
    double t_hi_factor = 50.0;
    double curvature_threshold = 0.05; // |d^2 log|tX| / d log t^2| below this is "linear"
    int min_run = 5;
};

// Fits the slope of log value against log t over the longest run of the grid
// whose second difference stays below curvature_threshold. The grid must be
// uniform in log t. Points at or past 90% of saturation_cap (the sample count
// for a measured curve) are the finite-size plateau and never join a run; a
// run truncated by that cutoff gets a slope-hazard flag. Runs shorter than
// min_run raise an error.
EstimateReport magnitude_slope_fit(const MagnitudeCurve& curve, const MagnitudeOptions& opt,
                                   double saturation_cap);

// Measures the curve on a log-uniform grid of t_steps points spanning
// [t_lo_factor, t_hi_factor] / (median nearest-neighbor distance), then fits
// the slope as above with the sample count as the cap.
EstimateReport magnitude_dimension(const PointCloud& cloud, const MagnitudeOptions& opt);

} // namespace dimest
