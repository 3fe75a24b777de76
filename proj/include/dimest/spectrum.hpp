#pragma once

#include "dimest/types.hpp"

#include <string>

namespace dimest {

// Descending eigenvalues of the sample covariance of a neighborhood,
// clamped at zero, truncated to min(m-1, D) entries for m points.
// Computed on the smaller of the covariance/Gram sides.
Vector neighborhood_spectrum(const Matrix& nbhd);

enum class ThresholdKind { FO, Fan, MaxGap, Ratio, Participation, Kaiser, BrokenStick };

ThresholdKind threshold_from_string(const std::string& s);
std::string threshold_to_string(ThresholdKind k);

struct ThresholdSpec {
    ThresholdKind kind = ThresholdKind::FO;
    double alpha = 0.05;              // FO: keep while lambda_u > alpha * lambda_1
    double gap_threshold = 10.0;      // Fan: first u with lambda_u/lambda_{u+1} below this
    double cumulative_fraction = 0.95;// Fan: cumulative variance cutoff
    double gamma = 0.95;              // Ratio: cumulative fraction to exceed
    double kaiser_prop = 1.0;         // Kaiser: multiple of the mean eigenvalue (0.7 softens)
};

// Integer dimension from a descending spectrum. Participation ratio is
// real-valued; use threshold_value for it (this rounds).
int threshold_dimension(const Vector& lambda, const ThresholdSpec& spec);

// Same rules, but Participation returns the real participation ratio
// (sum lambda)^2 / sum lambda^2. All other kinds return the integer cast
// to double.
double threshold_value(const Vector& lambda, const ThresholdSpec& spec);

} // namespace dimest
