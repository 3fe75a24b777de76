#pragma once

#include "dimest/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dimest {

struct CatalogEntry {
    std::string name;
    int d;          // intrinsic dimension (for parametric families: with default args)
    int D;          // ambient dimension
    std::string desc;
};

// The 24 fixed benchmark manifolds. Parametric families (Sphere(d), SOn(n),
// Torus(R,r), Paraboloid(b,sign)) are requested by name with arguments.
const std::vector<CatalogEntry>& dataset_catalog();

struct DatasetSpec {
    std::string name;       // "M7_Roll", "Sphere(6)", "SOn(4)", "Torus(2,1)", "Paraboloid(1.5,-)"
    int n = 0;
    std::uint64_t seed = 0;
};

// Sample n points. Deterministic in (name, n, seed). Unknown names throw
// std::invalid_argument listing the valid ones.
PointCloud generate(const DatasetSpec& spec);
PointCloud generate(const std::string& name, int n, std::uint64_t seed);

// Append zero columns up to ambient dimension D.
PointCloud zero_pad(const PointCloud& c, int D);

// Surface area of {z = 2x^2 +/- y^2/b^2 : (x,y) in [-1,1]^2} (same for both
// signs), via Simpson's rule.
double paraboloid_area(double b);

// Point budget for the curvature sweep: round(10000 * area(b) / area(1)),
// so every surface in the family carries the same average point density.
int paraboloid_auto_count(double b);

// Tube angle of a torus point, in [0, 2pi); pi is the inner rim.
double torus_tube_angle(double x, double y, double z, double R, double r);

} // namespace dimest
