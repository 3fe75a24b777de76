#pragma once

#include "dimest/geometry.hpp"
#include "dimest/report.hpp"
#include "dimest/rng.hpp"
#include "dimest/spectrum.hpp"
#include "dimest/types.hpp"

namespace dimest {

struct LpcaOptions {
    NbhdSpec nbhd;
    ThresholdSpec threshold;
    Agg agg = Agg::Mean;
};

// Local PCA with a spectral cutoff. Locals follow point order; in eps mode,
// points whose ball holds fewer than 2 points are skipped (counted in
// diagnostics["skipped_points"]), and more than 10% skipped is an error.
// Locals are integers except under the participation-ratio rule, which is
// real-valued. Every local is capped by construction at min(#neighbors, D);
// reaching the cap raises the "throttled" flag.
EstimateReport lpca_estimate(const PointCloud& cloud, const LpcaOptions& opt);

struct CdimOptions {
    int k = 10;
    double tol = 1e-12;       // inner products up to +tol still count as obtuse
    int restarts = 32;        // greedy restarts when k > exhaustive_limit
    int exhaustive_limit = 20;
    std::uint64_t seed = 0;
    Agg agg = Agg::Mean;
};

// Largest subset of unit directions to the k neighbors with all pairwise
// angles >= pi/2, per point. Exhaustive branch-and-bound up to
// exhaustive_limit neighbors, seeded greedy restarts beyond that
// (then flagged "approximate").
EstimateReport conical_dimension(const PointCloud& cloud, const CdimOptions& opt);

// exposed for oracle tests
int max_obtuse_subset_exhaustive(const Matrix& dirs, double tol);
int max_obtuse_subset_greedy(const Matrix& dirs, double tol, int restarts, Rng& rng);

} // namespace dimest
