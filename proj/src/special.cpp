#include "dimest/special.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <stdexcept>

namespace dimest {

double cap_fraction(double d) {
    if (d < 0) throw std::invalid_argument("cap_fraction: d must be >= 0");
    return boost::math::ibeta(0.5 * (d + 1.0), 0.5, 0.75);
}

double cap_fraction_inverse(double target) {
    if (target <= 0.0) throw std::invalid_argument("cap_fraction_inverse: target must be positive");
    if (target >= cap_fraction(0.0)) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (cap_fraction(hi) > target) {
        hi *= 2.0;
        if (hi > 1e9) throw std::runtime_error("cap_fraction_inverse: target too small");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (cap_fraction(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double ess_skewness(double d) {
    if (d < 1.0) throw std::invalid_argument("ess_skewness: d must be >= 1");
    if (d == 1.0) return 0.0;
    return std::exp(2.0 * std::lgamma(0.5 * d) - std::lgamma(0.5 * (d + 1.0)) -
                    std::lgamma(0.5 * (d - 1.0)));
}

std::pair<double, bool> ess_skewness_inverse(double target, double d_hi) {
    if (d_hi <= 1.0) throw std::invalid_argument("ess_skewness_inverse: d_hi must exceed 1");
    if (target <= 0.0) return {1.0, false};
    const int steps = 4000;
    double prev_d = 1.0, prev_s = 0.0;
    for (int i = 1; i <= steps; ++i) {
        double d = 1.0 + (d_hi - 1.0) * i / steps;
        double s = ess_skewness(d);
        if (s >= target) {
            double w = (target - prev_s) / (s - prev_s);
            return {prev_d + w * (d - prev_d), false};
        }
        prev_d = d;
        prev_s = s;
    }
    return {d_hi, true};
}

double log_bessel_i0(double x) {
    x = std::fabs(x);
    if (x < 600.0) return std::log(boost::math::cyl_bessel_i(0, x));
    // asymptotic: I0(x) ~ e^x / sqrt(2 pi x) (1 + 1/(8x) + 9/(128 x^2))
    return x - 0.5 * std::log(2.0 * 3.141592653589793 * x) +
           std::log1p(1.0 / (8.0 * x) + 9.0 / (128.0 * x * x));
}

double bessel_ratio(double tau) {
    if (tau == 0.0) return 0.0;
    if (tau < 600.0)
        return boost::math::cyl_bessel_i(1, tau) / boost::math::cyl_bessel_i(0, tau);
    double t = 1.0 / tau;
    return 1.0 - 0.5 * t - 0.125 * t * t - 0.125 * t * t * t;
}

double bessel_ratio_inverse(double r) {
    if (r <= 0.0) return 0.0;
    if (r >= 1.0 - 1e-12) return 1e12;
    // Best & Fisher starting value
    double tau;
    if (r < 0.53)
        tau = 2.0 * r + r * r * r + 5.0 * r * r * r * r * r / 6.0;
    else if (r < 0.85)
        tau = -0.4 + 1.39 * r + 0.43 / (1.0 - r);
    else
        tau = 1.0 / (r * r * r - 4.0 * r * r + 3.0 * r);
    for (int it = 0; it < 50; ++it) {
        double A = bessel_ratio(tau);
        double dA = 1.0 - A * A - A / tau; // d/dtau I1/I0
        if (dA <= 0.0) break;
        double step = (A - r) / dA;
        tau -= step;
        if (tau <= 0.0) tau = 1e-12;
        if (std::fabs(step) < 1e-12 * (1.0 + tau)) break;
    }
    return tau;
}

double vonmises_kl(double nu1, double tau1, double nu2, double tau2) {
    return log_bessel_i0(tau2) - log_bessel_i0(tau1) +
           bessel_ratio(tau1) * (tau1 - tau2 * std::cos(nu1 - nu2));
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const double pi = 3.141592653589793;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

double knn_ratio_kl(double d1, double d2, int k, int quad_points) {
    if (d1 <= 0 || d2 <= 0) throw std::invalid_argument("knn_ratio_kl: dimensions must be positive");
    if (k < 1) throw std::invalid_argument("knn_ratio_kl: k must be >= 1");
    std::vector<double> x, w;
    gauss_legendre(quad_points, x, w);
    double s = 0.0;
    for (int i = 0; i < quad_points; ++i) {
        double rho = 0.5 * (x[i] + 1.0); // map to (0,1)
        double lr = std::log(rho);
        auto logg = [&](double d) {
            return std::log(k * d) + (d - 1.0) * lr + (k - 1.0) * std::log1p(-std::pow(rho, d));
        };
        double lg1 = logg(d1);
        s += w[i] * 0.5 * std::exp(lg1) * (lg1 - logg(d2));
    }
    return s;
}

} // namespace dimest
