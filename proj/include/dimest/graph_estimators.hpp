#pragma once

#include "dimest/report.hpp"
#include "dimest/types.hpp"

#include <cstdint>
#include <vector>

namespace dimest {

struct MstEdge {
    int a, b;        // a < b
    double w;
};

// Exact Euclidean MST (Prim, O(N^2), distances on the fly). Among equal keys
// the smallest vertex index wins, so the edge list is deterministic; every
// MST of a graph has the same weight multiset, so downstream sums never
// depend on the tie-break.
std::vector<MstEdge> minimum_spanning_tree(const Matrix& X);

// sum of edge weights^alpha
double mst_alpha_weight(const std::vector<MstEdge>& edges, double alpha);

// total length of the directed knn graph (each point contributes its k
// nearest neighbor distances)
double knn_total_length(const Matrix& X, int k);

// Subsample sizes round(f * N) for `steps` fractions spread evenly over
// [f_min, f_max], each drawn `repeats` times without replacement.
struct SubsampleSchedule {
    double f_min = 0.75;
    double f_max = 1.0;
    int steps = 10;
    int repeats = 10;
    std::uint64_t seed = 0;
};

struct Ph0Options {
    double alpha = 0.5; // edge-weight power
    SubsampleSchedule schedule;
};

// Growth rate of MST alpha-weights under subsampling: slope m of
// log E_alpha vs log n gives d = alpha / (1 - m). Slopes >= 1 or within
// alpha/100 of 1 raise "slope_hazard" and the value is returned verbatim.
EstimateReport ph0_estimate(const PointCloud& cloud, const Ph0Options& opt);

struct KnnFitOptions {
    int k = 1;
    SubsampleSchedule schedule;
};

// Same scheme on total knn-graph length: d = 1 / (1 - m).
EstimateReport knn_estimate(const PointCloud& cloud, const KnnFitOptions& opt);

} // namespace dimest
