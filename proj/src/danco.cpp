#include "dimest/parametric.hpp"

#include "dimest/datasets.hpp"
#include "dimest/parallel.hpp"
#include "dimest/rng.hpp"
#include "dimest/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace dimest {

namespace {
constexpr double NaN = std::numeric_limits<double>::quiet_NaN();
}

DancoStats danco_stats(const PointCloud& cloud, int k, int d_cap) {
    const Matrix& X = cloud.points;
    const int n = static_cast<int>(X.rows());
    if (k < 2) throw std::invalid_argument("danco_stats: k must be >= 2");
    if (n < k + 2) throw std::invalid_argument("danco_stats: need N >= k+2");
    NeighborIndex nn = knn_query(X, k + 1);

    std::vector<double> rho;
    rho.reserve(n);
    std::vector<double> nu(n, NaN), tau(n, NaN);

    parallel_for(n, [&](int i) {
        // per-point von Mises fit over the pairwise angles between neighbor
        // directions
        Matrix dirs(k, X.cols());
        int m = 0;
        for (int t = 0; t < k; ++t) {
            double len = nn.dists[i][t];
            if (len == 0.0) continue;
            dirs.row(m++) = (X.row(nn.ids[i][t]) - X.row(i)) / len;
        }
        if (m < 2) return;
        double sc = 0.0, ss = 0.0;
        long cnt = 0;
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) {
                double c = std::clamp(dirs.row(a).dot(dirs.row(b)), -1.0, 1.0);
                double th = std::acos(c);
                sc += std::cos(th);
                ss += std::sin(th);
                ++cnt;
            }
        nu[i] = std::atan2(ss, sc);
        double rbar = std::sqrt(sc * sc + ss * ss) / static_cast<double>(cnt);
        tau[i] = bessel_ratio_inverse(rbar);
    });

    for (int i = 0; i < n; ++i) {
        double r1 = nn.dists[i][0], rk = nn.dists[i][k];
        if (r1 == 0.0 || r1 == rk) continue;
        rho.push_back(r1 / rk);
    }
    if (rho.empty()) throw std::runtime_error("danco_stats: no usable distance ratios");

    DancoStats s;
    s.d_ml = knn_ratio_ml_integer(rho, k, d_cap);
    double sn = 0.0, st = 0.0;
    long cnt = 0;
    for (int i = 0; i < n; ++i) {
        if (std::isnan(nu[i])) continue;
        sn += nu[i];
        st += tau[i];
        ++cnt;
    }
    if (cnt == 0) throw std::runtime_error("danco_stats: no usable angle statistics");
    s.nu = sn / cnt;
    s.tau = st / cnt;
    return s;
}

DancoCalibration danco_calibrate(int n, int k, int d_cap, int reps, std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("danco_calibrate: reps must be >= 1");
    DancoCalibration cal;
    cal.n = n;
    cal.k = k;
    cal.d_cap = d_cap;
    cal.reps = reps;
    cal.seed = seed;
    cal.per_dim.resize(d_cap);
    for (int dim = 1; dim <= d_cap; ++dim) {
        DancoStats acc{0.0, 0.0, 0.0};
        for (int r = 0; r < reps; ++r) {
            std::uint64_t s = Rng::mix(seed + 1315423911ull * dim + r);
            PointCloud sph = generate("Sphere(" + std::to_string(dim) + ")", n, s);
            DancoStats st = danco_stats(sph, k, d_cap);
            acc.d_ml += st.d_ml;
            acc.nu += st.nu;
            acc.tau += st.tau;
        }
        acc.d_ml /= reps;
        acc.nu /= reps;
        acc.tau /= reps;
        cal.per_dim[dim - 1] = acc;
    }
    return cal;
}

nlohmann::json danco_calibration_to_json(const DancoCalibration& c) {
    nlohmann::json j;
    j["n"] = c.n;
    j["k"] = c.k;
    j["d_cap"] = c.d_cap;
    j["reps"] = c.reps;
    j["seed"] = c.seed;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < c.per_dim.size(); ++i)
        rows.push_back({{"dim", i + 1},
                        {"d_ml", c.per_dim[i].d_ml},
                        {"nu", c.per_dim[i].nu},
                        {"tau", c.per_dim[i].tau}});
    j["per_dim"] = rows;
    return j;
}

DancoCalibration danco_calibration_from_json(const nlohmann::json& j) {
    DancoCalibration c;
    c.n = j.at("n").get<int>();
    c.k = j.at("k").get<int>();
    c.d_cap = j.at("d_cap").get<int>();
    c.reps = j.at("reps").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.per_dim.resize(c.d_cap);
    for (const auto& row : j.at("per_dim")) {
        int dim = row.at("dim").get<int>();
        if (dim < 1 || dim > c.d_cap) throw std::invalid_argument("danco calibration: bad dim entry");
        c.per_dim[dim - 1] = {row.at("d_ml").get<double>(), row.at("nu").get<double>(),
                              row.at("tau").get<double>()};
    }
    return c;
}

namespace {

using CalKey = std::tuple<int, int, int, int, std::uint64_t>;
std::map<CalKey, DancoCalibration> g_cal_cache;
std::mutex g_cal_mutex;

const DancoCalibration& cached_calibration(int n, int k, int d_cap, int reps, std::uint64_t seed) {
    CalKey key{n, k, d_cap, reps, seed};
    std::lock_guard<std::mutex> lock(g_cal_mutex);
    auto it = g_cal_cache.find(key);
    if (it == g_cal_cache.end())
        it = g_cal_cache.emplace(key, danco_calibrate(n, k, d_cap, reps, seed)).first;
    return it->second;
}

} // namespace

EstimateReport danco_estimate(const PointCloud& cloud, const DancoOptions& opt) {
    if (opt.d_cap < 1) throw std::invalid_argument("danco_estimate: d_cap must be >= 1");
    DancoStats data = danco_stats(cloud, opt.k, opt.d_cap);
    const DancoCalibration& cal = cached_calibration(static_cast<int>(cloud.n()), opt.k,
                                                     opt.d_cap, opt.calib_reps, opt.calib_seed);

    EstimateReport rep;
    int best = 1;
    double bestd = std::numeric_limits<double>::infinity();
    for (int dim = 1; dim <= opt.d_cap; ++dim) {
        const DancoStats& c = cal.per_dim[dim - 1];
        double dist = knn_ratio_kl(data.d_ml, c.d_ml, opt.k) +
                      vonmises_kl(data.nu, data.tau, c.nu, c.tau);
        if (dist < bestd) {
            bestd = dist;
            best = dim;
        }
    }
    rep.estimate = best;
    rep.diagnostics["d_ml"] = data.d_ml;
    rep.diagnostics["nu"] = data.nu;
    rep.diagnostics["tau"] = data.tau;
    rep.diagnostics["kl_at_min"] = bestd;
    return rep;
}

} // namespace dimest
