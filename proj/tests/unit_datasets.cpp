#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dimest/corruption.hpp>
#include <dimest/datasets.hpp>

#include <Eigen/LU>

#include <cmath>
#include <set>
#include <string>

using namespace dimest;

TEST_CASE("catalog entries all generate with the advertised shape") {
    const auto& cat = dataset_catalog();
    CHECK(cat.size() == 24);
    for (const auto& e : cat) {
        PointCloud c = generate(e.name, 60, 7);
        CHECK(c.points.rows() == 60);
        CHECK(c.points.cols() == e.D);
        REQUIRE(c.meta.true_dim.has_value());
        CHECK(*c.meta.true_dim == e.d);
        CHECK(c.meta.name == e.name);
        CHECK(c.points.allFinite());
    }
}

TEST_CASE("generation is deterministic in the seed") {
    for (const char* name : {"M1_Sphere", "M6_Nonlinear", "Mbeta", "Torus(2,1)"}) {
        PointCloud a = generate(name, 50, 11);
        PointCloud b = generate(name, 50, 11);
        PointCloud c = generate(name, 50, 12);
        CHECK(a.points == b.points);
        CHECK(a.points != c.points);
    }
}

TEST_CASE("sphere samples live on the unit sphere") {
    PointCloud s = generate("Sphere(6)", 120, 3);
    CHECK(s.points.cols() == 7);
    CHECK(*s.meta.true_dim == 6);
    for (int i = 0; i < s.points.rows(); ++i)
        CHECK(s.points.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));

    PointCloud m1 = generate("M1_Sphere", 80, 5);
    CHECK(m1.points.cols() == 11);
    for (int i = 0; i < m1.points.rows(); ++i)
        CHECK(m1.points.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("SOn rows flatten special orthogonal matrices") {
    PointCloud c = generate("SOn(4)", 40, 9);
    CHECK(c.points.cols() == 16);
    CHECK(*c.meta.true_dim == 6); // n(n-1)/2
    for (int i = 0; i < c.points.rows(); ++i) {
        Eigen::Matrix4d Q;
        for (int r = 0; r < 4; ++r)
            for (int col = 0; col < 4; ++col) Q(r, col) = c.points(i, 4 * r + col);
        Eigen::Matrix4d G = Q.transpose() * Q;
        CHECK((G - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(Q.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("torus samples satisfy the implicit surface equation") {
    const double R = 2.0, r = 0.75;
    PointCloud c = generate("Torus(2,0.75)", 150, 4);
    CHECK(c.points.cols() == 3);
    CHECK(*c.meta.true_dim == 2);
    for (int i = 0; i < c.points.rows(); ++i) {
        double x = c.points(i, 0), y = c.points(i, 1), z = c.points(i, 2);
        double rho = std::sqrt(x * x + y * y);
        double lhs = (rho - R) * (rho - R) + z * z;
        CHECK(lhs == doctest::Approx(r * r).epsilon(1e-10));
    }
}

TEST_CASE("tube angle recovers the generating angle, inner rim maps to pi") {
    const double R = 2.0, r = 0.5;
    for (double theta : {0.0, 0.3, 1.5707963267948966, 2.9, 3.141592653589793, 4.2, 6.1}) {
        for (double phi : {0.0, 1.0, 2.5, 5.0}) {
            double w = R + r * std::cos(theta);
            double x = w * std::cos(phi), y = w * std::sin(phi), z = r * std::sin(theta);
            double rec = torus_tube_angle(x, y, z, R, r);
            double diff = std::fabs(rec - theta);
            diff = std::min(diff, 2.0 * 3.14159265358979323846 - diff);
            CHECK(diff < 1e-10);
        }
    }
    // point on the inner equator
    CHECK(torus_tube_angle(R - r, 0.0, 0.0, R, r) == doctest::Approx(3.14159265358979323846));
}

TEST_CASE("paraboloid samples obey the height map on the unit square") {
    for (const char* name : {"Paraboloid(1.5,+)", "Paraboloid(0.8,-)"}) {
        PointCloud c = generate(name, 200, 6);
        CHECK(c.points.cols() == 3);
        double b = (std::string(name).find("1.5") != std::string::npos) ? 1.5 : 0.8;
        double sign = (std::string(name).find("+") != std::string::npos) ? 1.0 : -1.0;
        for (int i = 0; i < c.points.rows(); ++i) {
            double x = c.points(i, 0), y = c.points(i, 1), z = c.points(i, 2);
            CHECK(x >= -1.0);
            CHECK(x <= 1.0);
            CHECK(y >= -1.0);
            CHECK(y <= 1.0);
            CHECK(z == doctest::Approx(2.0 * x * x + sign * y * y / (b * b)).epsilon(1e-12));
        }
    }
}

TEST_CASE("cube boundary samples pin exactly one coordinate to a face") {
    PointCloud c = generate("M10a_Cubic", 100, 2);
    CHECK(c.points.cols() == 11);
    for (int i = 0; i < c.points.rows(); ++i) {
        int pinned = 0;
        for (int j = 0; j < 11; ++j) {
            double v = c.points(i, j);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (v == 0.0 || v == 1.0) ++pinned;
        }
        CHECK(pinned >= 1);
    }
}

TEST_CASE("zero_pad appends zero columns and keeps the data") {
    PointCloud s = generate("Sphere(2)", 30, 1);
    PointCloud p = zero_pad(s, 11);
    CHECK(p.points.rows() == 30);
    CHECK(p.points.cols() == 11);
    CHECK(p.points.leftCols(3) == s.points);
    CHECK(p.points.rightCols(8).cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.meta.name == s.meta.name);
    CHECK(zero_pad(s, 3).points == s.points);
    CHECK_THROWS_AS(zero_pad(s, 2), std::invalid_argument);
}

namespace {

// independent check of the surface-area integral with Gauss-Legendre 64x64
double gl_paraboloid_area(double b) {
    const int m = 64;
    // nodes/weights on [-1,1] via Newton iteration on Legendre polynomials
    std::vector<double> xs(m), ws(m);
    for (int i = 0; i < m; ++i) {
        double x = std::cos(3.14159265358979323846 * (i + 0.75) / (m + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = m * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= m; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = m * (x * p1 - p0) / (x * x - 1.0);
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    double total = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double x = xs[i], y = xs[j];
            total += ws[i] * ws[j] *
                     std::sqrt(1.0 + 16.0 * x * x + 4.0 * y * y / (b * b * b * b));
        }
    return total;
}

} // namespace

TEST_CASE("paraboloid_area matches an independent quadrature") {
    for (double b : {0.5, 1.0, 1.7, 3.0}) {
        double ref = gl_paraboloid_area(b);
        CHECK(paraboloid_area(b) == doctest::Approx(ref).epsilon(1e-6));
    }
    CHECK(paraboloid_area(1.0) > 4.0); // curved sheet beats its flat footprint
}

TEST_CASE("paraboloid_auto_count anchors at b=1 and tracks the area") {
    CHECK(paraboloid_auto_count(1.0) == 10000);
    CHECK(paraboloid_auto_count(0.5) > 10000);
    CHECK(paraboloid_auto_count(2.0) < 10000);
    double ratio = paraboloid_area(2.0) / paraboloid_area(1.0);
    CHECK(paraboloid_auto_count(2.0) == doctest::Approx(10000.0 * ratio).epsilon(1e-3));
}

TEST_CASE("unknown dataset names are rejected with the catalog in the message") {
    CHECK_THROWS_AS(generate("M99_Nope", 10, 0), std::invalid_argument);
    try {
        generate("M99_Nope", 10, 0);
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("M99_Nope") != std::string::npos);
        CHECK(msg.find("M1_Sphere") != std::string::npos);
        CHECK(msg.find("Torus(R,r)") != std::string::npos);
    }
    CHECK_THROWS_AS(generate("Sphere(6)", 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate("Paraboloid(1,?)", 10, 0), std::invalid_argument);
}

TEST_CASE("gaussian corruption is seeded, additive, and matches its variance") {
    PointCloud base = generate("M9_Affine", 2000, 3);
    const double var = 0.25;
    PointCloud a = add_gaussian_noise(base, var, 77);
    PointCloud b = add_gaussian_noise(base, var, 77);
    PointCloud c = add_gaussian_noise(base, var, 78);
    CHECK(a.points == b.points);
    CHECK(a.points != c.points);
    CHECK(a.points.rows() == base.points.rows());
    CHECK(a.points.cols() == base.points.cols());

    Matrix diff = a.points - base.points;
    double mean = diff.mean();
    double msq = diff.array().square().mean();
    CHECK(std::fabs(mean) < 0.02);
    CHECK(msq == doctest::Approx(var).epsilon(0.05));

    PointCloud z = add_gaussian_noise(base, 0.0, 5);
    CHECK(z.points == base.points);
}

TEST_CASE("outlier corruption rescales whole rows by factors in [3,6]") {
    PointCloud base = generate("M9_Affine", 400, 1);
    base.points.array() += 4.0; // keep every coordinate well away from zero
    const int n_out = 25;
    PointCloud a = add_outliers(base, n_out, 13);
    PointCloud b = add_outliers(base, n_out, 13);
    CHECK(a.points == b.points);

    int changed = 0;
    for (int i = 0; i < a.points.rows(); ++i) {
        if (a.points.row(i) == base.points.row(i)) continue;
        ++changed;
        for (int j = 0; j < a.points.cols(); ++j) {
            double ratio = a.points(i, j) / base.points(i, j);
            CHECK(ratio >= 3.0);
            CHECK(ratio <= 6.0);
        }
    }
    CHECK(changed == n_out);

    PointCloud none = add_outliers(base, 0, 13);
    CHECK(none.points == base.points);
    CHECK_THROWS_AS(add_outliers(base, 401, 13), std::invalid_argument);
    CHECK_THROWS_AS(add_outliers(base, -1, 13), std::invalid_argument);
}
