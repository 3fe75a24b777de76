#pragma once

#include <utility>
#include <vector>

namespace dimest {

// P(cap covers a fixed point): regularized incomplete beta I_{3/4}((d+1)/2, 1/2).
// Strictly decreasing in d on [0, inf); S(0) = 2/3, S(1) = 1/2.
double cap_fraction(double d);

// Inverse of cap_fraction by bisection; |cap_fraction(result) - target| < 1e-9
// for target in (0, 2/3). Targets >= 2/3 return 0, targets <= 0 throw.
double cap_fraction_inverse(double target);

// Expected simplex-volume skewness of a d-ball: Gamma(d/2)^2 /
// (Gamma((d+1)/2) Gamma((d-1)/2)). 0 at d = 1, increases to 1.
double ess_skewness(double d);

// Invert ess_skewness by linear interpolation on a uniform grid over
// [1, d_hi]. Returns the estimate and whether it was clamped at d_hi.
std::pair<double, bool> ess_skewness_inverse(double target, double d_hi);

// von Mises helpers. A(tau) = I1(tau)/I0(tau).
double log_bessel_i0(double x);
double bessel_ratio(double tau);
double bessel_ratio_inverse(double r);     // A^{-1}, Best-Fisher start + Newton
double vonmises_kl(double nu1, double tau1, double nu2, double tau2);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// KL divergence between the neighbor-ratio densities
// g(rho; d, k) = k d rho^{d-1} (1 - rho^d)^{k-1} on (0,1),
// KL(g(.; d1, k) || g(.; d2, k)), by Gauss-Legendre quadrature.
double knn_ratio_kl(double d1, double d2, int k, int quad_points = 256);

} // namespace dimest
