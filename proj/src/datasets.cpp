#include "dimest/datasets.hpp"

#include "dimest/rng.hpp"

#include <Eigen/Dense>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace dimest {

namespace {

constexpr double TWO_PI = 6.283185307179586476925286766559;

// Nonlinear families M4/M6/M8, Mn1/Mn2 and Mbeta share one per-coordinate
// feature list; each family keeps the first `m` entries. The first two
// features alone are injective on [0,1), so every truncation embeds.
void put_features(double u, int m, double* out) {
    const double f[6] = {std::sin(TWO_PI * u), std::cos(TWO_PI * u),
                         std::sin(2 * TWO_PI * u), std::cos(2 * TWO_PI * u),
                         u, u * u};
    for (int j = 0; j < m; ++j) out[j] = f[j];
}

Matrix feature_cloud(int n, int d, int m, Rng& rng, bool beta_latent) {
    Matrix X(n, d * m);
    std::vector<double> u(d);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < d; ++c) {
            double v = rng.uniform();
            u[c] = beta_latent ? v * v : v;
        }
        for (int c = 0; c < d; ++c) put_features(u[c], m, X.row(i).data() + c * m);
    }
    return X;
}

// Fixed random affine maps: the manifold itself must not change with the
// sampling seed, so these draw from constant streams.
Matrix fixed_affine_matrix(int rows, int cols, std::uint64_t slot) {
    Rng rng = Rng::stream(0xD1A7A5E7C0FFEE00ull, slot);
    Matrix A(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) A(i, j) = rng.normal();
    return A;
}

Matrix affine_cloud(int n, int d, int D, std::uint64_t slot, Rng& rng) {
    Matrix A = fixed_affine_matrix(D, d, slot);
    Matrix b = fixed_affine_matrix(1, D, slot + 7);
    Matrix X(n, D);
    Eigen::VectorXd u(d);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < d; ++c) u(c) = rng.uniform();
        X.row(i) = (A * u).transpose() + b.row(0);
    }
    return X;
}

Matrix sphere_cloud(int n, int d, Rng& rng) {
    Matrix X(n, d + 1);
    for (int i = 0; i < n; ++i) {
        double s2;
        do {
            for (int c = 0; c <= d; ++c) X(i, c) = rng.normal();
            s2 = X.row(i).squaredNorm();
        } while (s2 == 0.0);
        X.row(i) /= std::sqrt(s2);
    }
    return X;
}

Matrix cube_boundary_cloud(int n, int D, Rng& rng) {
    Matrix X(n, D);
    for (int i = 0; i < n; ++i) {
        std::uint64_t f = rng.below(2ull * D);
        int axis = static_cast<int>(f >> 1);
        for (int c = 0; c < D; ++c) X(i, c) = rng.uniform();
        X(i, axis) = static_cast<double>(f & 1);
    }
    return X;
}

Matrix son_cloud(int n, int order, Rng& rng) {
    const int D = order * order;
    Matrix X(n, D);
    Eigen::MatrixXd G(order, order);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < order; ++r)
            for (int c = 0; c < order; ++c) G(r, c) = rng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
        Eigen::MatrixXd Q = qr.householderQ();
        Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int c = 0; c < order; ++c)
            if (R(c, c) < 0) Q.col(c) = -Q.col(c);
        // Haar on O(n); fold onto SO(n) with a measure-preserving flip
        if (Q.determinant() < 0) Q.col(0) = -Q.col(0);
        for (int r = 0; r < order; ++r)
            for (int c = 0; c < order; ++c) X(i, r * order + c) = Q(r, c);
    }
    return X;
}

Matrix torus_cloud(int n, double R, double r, Rng& rng) {
    Matrix X(n, 3);
    for (int i = 0; i < n; ++i) {
        // area density is proportional to R + r cos(theta); rejection on theta
        double theta;
        for (;;) {
            theta = rng.uniform(0.0, TWO_PI);
            if (rng.uniform() * (R + r) <= R + r * std::cos(theta)) break;
        }
        double phi = rng.uniform(0.0, TWO_PI);
        double w = R + r * std::cos(theta);
        X(i, 0) = w * std::cos(phi);
        X(i, 1) = w * std::sin(phi);
        X(i, 2) = r * std::sin(theta);
    }
    return X;
}

Matrix paraboloid_cloud(int n, double b, int sign, Rng& rng) {
    Matrix X(n, 3);
    for (int i = 0; i < n; ++i) {
        double x = rng.uniform(-1.0, 1.0);
        double y = rng.uniform(-1.0, 1.0);
        X(i, 0) = x;
        X(i, 1) = y;
        X(i, 2) = 2.0 * x * x + sign * y * y / (b * b);
    }
    return X;
}

struct ParsedName {
    std::string base;
    std::vector<std::string> args;
};

ParsedName parse_name(const std::string& name) {
    ParsedName p;
    auto lp = name.find('(');
    if (lp == std::string::npos) {
        p.base = name;
        return p;
    }
    if (name.back() != ')') throw std::invalid_argument("dataset name '" + name + "': missing ')'");
    p.base = name.substr(0, lp);
    std::string inner = name.substr(lp + 1, name.size() - lp - 2);
    std::string cur;
    for (char ch : inner) {
        if (ch == ',') {
            p.args.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch)))
            cur += ch;
    }
    if (!cur.empty()) p.args.push_back(cur);
    return p;
}

double arg_num(const ParsedName& p, std::size_t i, const char* what) {
    if (i >= p.args.size())
        throw std::invalid_argument(p.base + ": missing argument " + what);
    try {
        return std::stod(p.args[i]);
    } catch (...) {
        throw std::invalid_argument(p.base + ": bad argument '" + p.args[i] + "' for " + what);
    }
}

} // namespace

const std::vector<CatalogEntry>& dataset_catalog() {
    static const std::vector<CatalogEntry> cat = {
        {"M1_Sphere", 10, 11, "uniform distribution on the round unit sphere"},
        {"M2_Affine_3to5", 3, 5, "affine subspace, fixed random injection of [0,1]^3"},
        {"M3_Nonlinear_4to6", 4, 6, "nonlinear 4-manifold with one thin direction"},
        {"M4_Nonlinear", 4, 8, "nonlinear manifold from the shared feature map"},
        {"M5a_Helix1d", 1, 3, "1d helix"},
        {"M5b_Helix2d", 2, 3, "helicoid"},
        {"M6_Nonlinear", 6, 36, "nonlinear manifold from the shared feature map"},
        {"M7_Roll", 2, 3, "classic swiss roll"},
        {"M8_Nonlinear", 12, 72, "nonlinear manifold from the shared feature map"},
        {"M9_Affine", 20, 20, "full-dimensional fixed random affine image of [0,1]^20"},
        {"M10a_Cubic", 10, 11, "boundary of the 11-cube"},
        {"M10b_Cubic", 17, 18, "boundary of the 18-cube"},
        {"M10c_Cubic", 24, 25, "boundary of the 25-cube"},
        {"M10d_Cubic", 70, 71, "boundary of the 71-cube"},
        {"M11_Moebius", 2, 3, "Moebius band with 10 half-twists"},
        {"M12_Norm", 20, 20, "isotropic multivariate Gaussian"},
        {"M13a_Scurve", 2, 3, "S-shaped surface"},
        {"M13b_Spiral", 1, 13, "helix curve in 13 dimensions"},
        {"Mbeta", 10, 40, "smooth nonuniform density, nonlinearly embedded"},
        {"Mn1_Nonlinear", 18, 72, "nonlinearly embedded manifold"},
        {"Mn2_Nonlinear", 24, 96, "nonlinearly embedded manifold"},
        {"Mp1_Paraboloid", 3, 12, "3-paraboloid, nonlinearly embedded"},
        {"Mp2_Paraboloid", 6, 21, "6-paraboloid, nonlinearly embedded"},
        {"Mp3_Paraboloid", 9, 30, "9-paraboloid, nonlinearly embedded"},
    };
    return cat;
}

double paraboloid_area(double b) {
    // integrand sqrt(1 + 16 x^2 + 4 y^2 / b^4) over [-1,1]^2, Simpson 128x128
    const int m = 128;
    const double h = 2.0 / m;
    auto wt = [&](int i) { return (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    double total = 0.0;
    for (int i = 0; i <= m; ++i) {
        double x = -1.0 + i * h;
        for (int j = 0; j <= m; ++j) {
            double y = -1.0 + j * h;
            total += wt(i) * wt(j) * std::sqrt(1.0 + 16.0 * x * x + 4.0 * y * y / (b * b * b * b));
        }
    }
    return total * h * h / 9.0;
}

int paraboloid_auto_count(double b) {
    return static_cast<int>(std::lround(10000.0 * paraboloid_area(b) / paraboloid_area(1.0)));
}

double torus_tube_angle(double x, double y, double z, double R, double r) {
    double theta = std::atan2(z / r, (std::sqrt(x * x + y * y) - R) / r);
    if (theta < 0) theta += TWO_PI;
    return theta;
}

PointCloud generate(const DatasetSpec& spec) {
    if (spec.n < 1) throw std::invalid_argument("generate: n must be positive");
    ParsedName pn = parse_name(spec.name);
    Rng rng = Rng::stream(spec.seed, 0);
    const int n = spec.n;

    PointCloud out;
    out.meta.name = spec.name;
    out.meta.seed = spec.seed;

    auto uniform_mat = [&](int rows, int cols) {
        Matrix U(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int c = 0; c < cols; ++c) U(i, c) = rng.uniform();
        return U;
    };

    const std::string& b = pn.base;
    if (b == "M1_Sphere") {
        out.points = sphere_cloud(n, 10, rng);
        out.meta.true_dim = 10;
    } else if (b == "Sphere") {
        int d = static_cast<int>(arg_num(pn, 0, "d"));
        if (d < 1) throw std::invalid_argument("Sphere: d must be >= 1");
        out.points = sphere_cloud(n, d, rng);
        out.meta.true_dim = d;
    } else if (b == "M2_Affine_3to5") {
        out.points = affine_cloud(n, 3, 5, 11, rng);
        out.meta.true_dim = 3;
    } else if (b == "M9_Affine") {
        out.points = affine_cloud(n, 20, 20, 13, rng);
        out.meta.true_dim = 20;
    } else if (b == "M3_Nonlinear_4to6") {
        Matrix U = uniform_mat(n, 4);
        Matrix X(n, 6);
        for (int i = 0; i < n; ++i) {
            double u1 = U(i, 0), u2 = U(i, 1), u3 = U(i, 2), v = 0.25 * U(i, 3);
            X(i, 0) = u1;
            X(i, 1) = u2;
            X(i, 2) = u3;
            X(i, 3) = v;
            X(i, 4) = std::sin(TWO_PI * u1) * std::cos(TWO_PI * u2);
            X(i, 5) = std::cos(TWO_PI * u3) * std::sin(3.141592653589793 * v);
        }
        out.points = std::move(X);
        out.meta.true_dim = 4;
    } else if (b == "M4_Nonlinear") {
        out.points = feature_cloud(n, 4, 2, rng, false);
        out.meta.true_dim = 4;
    } else if (b == "M6_Nonlinear") {
        out.points = feature_cloud(n, 6, 6, rng, false);
        out.meta.true_dim = 6;
    } else if (b == "M8_Nonlinear") {
        out.points = feature_cloud(n, 12, 6, rng, false);
        out.meta.true_dim = 12;
    } else if (b == "Mn1_Nonlinear") {
        out.points = feature_cloud(n, 18, 4, rng, false);
        out.meta.true_dim = 18;
    } else if (b == "Mn2_Nonlinear") {
        out.points = feature_cloud(n, 24, 4, rng, false);
        out.meta.true_dim = 24;
    } else if (b == "Mbeta") {
        out.points = feature_cloud(n, 10, 4, rng, true);
        out.meta.true_dim = 10;
    } else if (b == "M5a_Helix1d") {
        Matrix X(n, 3);
        for (int i = 0; i < n; ++i) {
            double t = rng.uniform();
            X(i, 0) = std::cos(TWO_PI * t);
            X(i, 1) = std::sin(TWO_PI * t);
            X(i, 2) = t;
        }
        out.points = std::move(X);
        out.meta.true_dim = 1;
    } else if (b == "M5b_Helix2d") {
        Matrix X(n, 3);
        for (int i = 0; i < n; ++i) {
            double u = rng.uniform(), v = rng.uniform();
            double th = 2 * TWO_PI * u;
            X(i, 0) = v * std::cos(th);
            X(i, 1) = v * std::sin(th);
            X(i, 2) = u;
        }
        out.points = std::move(X);
        out.meta.true_dim = 2;
    } else if (b == "M7_Roll") {
        Matrix X(n, 3);
        for (int i = 0; i < n; ++i) {
            double t = 1.5 * 3.141592653589793 * (1.0 + 2.0 * rng.uniform());
            double y = 21.0 * rng.uniform();
            X(i, 0) = t * std::cos(t);
            X(i, 1) = y;
            X(i, 2) = t * std::sin(t);
        }
        out.points = std::move(X);
        out.meta.true_dim = 2;
    } else if (b == "M10a_Cubic" || b == "M10b_Cubic" || b == "M10c_Cubic" || b == "M10d_Cubic") {
        int D = b == "M10a_Cubic" ? 11 : b == "M10b_Cubic" ? 18 : b == "M10c_Cubic" ? 25 : 71;
        out.points = cube_boundary_cloud(n, D, rng);
        out.meta.true_dim = D - 1;
    } else if (b == "M11_Moebius") {
        Matrix X(n, 3);
        for (int i = 0; i < n; ++i) {
            double phi = rng.uniform(0.0, TWO_PI);
            double s = rng.uniform(-1.0, 1.0);
            double w = 1.0 + 0.5 * s * std::cos(5.0 * phi);
            X(i, 0) = w * std::cos(phi);
            X(i, 1) = w * std::sin(phi);
            X(i, 2) = 0.5 * s * std::sin(5.0 * phi);
        }
        out.points = std::move(X);
        out.meta.true_dim = 2;
    } else if (b == "M12_Norm") {
        Matrix X(n, 20);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 20; ++c) X(i, c) = rng.normal();
        out.points = std::move(X);
        out.meta.true_dim = 20;
    } else if (b == "M13a_Scurve") {
        Matrix X(n, 3);
        for (int i = 0; i < n; ++i) {
            double t = 3.0 * 3.141592653589793 * (rng.uniform() - 0.5);
            double v = rng.uniform();
            X(i, 0) = std::sin(t);
            X(i, 1) = 2.0 * v;
            X(i, 2) = (t >= 0 ? 1.0 : -1.0) * (std::cos(t) - 1.0);
        }
        out.points = std::move(X);
        out.meta.true_dim = 2;
    } else if (b == "M13b_Spiral") {
        Matrix X(n, 13);
        for (int i = 0; i < n; ++i) {
            double t = rng.uniform();
            for (int j = 0; j < 6; ++j) {
                X(i, 2 * j) = std::sin(TWO_PI * (j + 1) * t);
                X(i, 2 * j + 1) = std::cos(TWO_PI * (j + 1) * t);
            }
            X(i, 12) = t;
        }
        out.points = std::move(X);
        out.meta.true_dim = 1;
    } else if (b == "Mp1_Paraboloid" || b == "Mp2_Paraboloid" || b == "Mp3_Paraboloid") {
        int d = b == "Mp1_Paraboloid" ? 3 : b == "Mp2_Paraboloid" ? 6 : 9;
        Matrix X(n, 3 * (d + 1));
        std::vector<double> w(d + 1);
        for (int i = 0; i < n; ++i) {
            double s2 = 0.0;
            for (int c = 0; c < d; ++c) {
                w[c] = rng.uniform(-1.0, 1.0);
                s2 += w[c] * w[c];
            }
            w[d] = s2;
            for (int c = 0; c <= d; ++c) {
                X(i, 3 * c) = w[c];
                X(i, 3 * c + 1) = std::sin(w[c]);
                X(i, 3 * c + 2) = std::cos(w[c]);
            }
        }
        out.points = std::move(X);
        out.meta.true_dim = d;
    } else if (b == "SOn") {
        int order = static_cast<int>(arg_num(pn, 0, "n"));
        if (order < 2) throw std::invalid_argument("SOn: order must be >= 2");
        out.points = son_cloud(n, order, rng);
        out.meta.true_dim = order * (order - 1) / 2;
    } else if (b == "Torus") {
        double R = pn.args.empty() ? 2.0 : arg_num(pn, 0, "R");
        double r = pn.args.size() < 2 ? 1.0 : arg_num(pn, 1, "r");
        if (!(R > r && r > 0)) throw std::invalid_argument("Torus: need R > r > 0");
        out.points = torus_cloud(n, R, r, rng);
        out.meta.true_dim = 2;
    } else if (b == "Paraboloid") {
        double pb = arg_num(pn, 0, "b");
        if (pb <= 0) throw std::invalid_argument("Paraboloid: b must be positive");
        int sign = 1;
        if (pn.args.size() > 1) {
            if (pn.args[1] == "+") sign = 1;
            else if (pn.args[1] == "-") sign = -1;
            else throw std::invalid_argument("Paraboloid: sign must be + or -");
        }
        out.points = paraboloid_cloud(n, pb, sign, rng);
        out.meta.true_dim = 2;
    } else {
        std::string names;
        for (const auto& e : dataset_catalog()) names += e.name + " ";
        throw std::invalid_argument("unknown dataset '" + spec.name + "'; known: " + names +
                                    "Sphere(d) SOn(n) Torus(R,r) Paraboloid(b,+|-)");
    }
    return out;
}

PointCloud generate(const std::string& name, int n, std::uint64_t seed) {
    return generate(DatasetSpec{name, n, seed});
}

PointCloud zero_pad(const PointCloud& c, int D) {
    if (D < c.points.cols()) throw std::invalid_argument("zero_pad: target dimension too small");
    PointCloud out;
    out.meta = c.meta;
    out.points = Matrix::Zero(c.points.rows(), D);
    out.points.leftCols(c.points.cols()) = c.points;
    return out;
}

} // namespace dimest
