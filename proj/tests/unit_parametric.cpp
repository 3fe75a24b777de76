#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dimest/geometry.hpp"
#include "dimest/parametric.hpp"
#include "dimest/special.hpp"

#include "test_util.hpp"

#include <cmath>
#include <numeric>
#include <vector>

using namespace dimest;
using testutil::cube_cloud;
using testutil::gaussian_cloud;

namespace {

PointCloud line_cloud(std::initializer_list<double> xs) {
    Matrix X(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) X(i++, 0) = x;
    return {X, {}};
}

} // namespace

// Four collinear points 0, 1, 3, 7 with k = 3 admit a full hand evaluation of
// the likelihood locals.
TEST_CASE("mle locals on a hand line") {
    PointCloud cloud = line_cloud({0, 1, 3, 7});
    MleOptions opt;
    opt.nbhd.k = 3;
    EstimateReport rep = mle_estimate(cloud, opt);
    REQUIRE(rep.locals.has_value());
    REQUIRE(rep.locals->size() == 4);
    const auto& l = *rep.locals;
    CHECK(l[0] == doctest::Approx(2.0 / (std::log(7.0) + std::log(7.0 / 3.0))).epsilon(1e-14));
    CHECK(l[1] == doctest::Approx(2.0 / (std::log(6.0) + std::log(3.0))).epsilon(1e-14));
    CHECK(l[2] == doctest::Approx(2.0 / (std::log(2.0) + std::log(4.0 / 3.0))).epsilon(1e-14));
    CHECK(l[3] ==
          doctest::Approx(2.0 / (std::log(7.0 / 4.0) + std::log(7.0 / 6.0))).epsilon(1e-14));
    CHECK(rep.estimate ==
          doctest::Approx((l[0] + l[1] + l[2] + l[3]) / 4.0).epsilon(1e-14));

    opt.agg = Agg::HMean;
    EstimateReport h = mle_estimate(cloud, opt);
    CHECK(h.estimate ==
          doctest::Approx(4.0 / (1 / l[0] + 1 / l[1] + 1 / l[2] + 1 / l[3])).epsilon(1e-14));

    // the small-sample correction only rescales the shared log sum
    opt.agg = Agg::Mean;
    opt.corrected = true;
    EstimateReport c = mle_estimate(cloud, opt);
    for (int i = 0; i < 4; ++i)
        CHECK((*c.locals)[i] == doctest::Approx(0.5 * l[i]).epsilon(1e-14));
}

TEST_CASE("mle radius form on a hand line") {
    PointCloud cloud = line_cloud({0, 1, 3});
    MleOptions opt;
    opt.nbhd.mode = NbhdSpec::Mode::Eps;
    opt.nbhd.eps = 3.5;
    EstimateReport rep = mle_estimate(cloud, opt);
    const auto& l = *rep.locals;
    REQUIRE(l.size() == 3);
    CHECK(l[0] ==
          doctest::Approx(2.0 / (std::log(3.5) + std::log(3.5 / 3.0))).epsilon(1e-14));
    CHECK(l[1] ==
          doctest::Approx(2.0 / (std::log(3.5) + std::log(3.5 / 2.0))).epsilon(1e-14));
    CHECK(l[2] ==
          doctest::Approx(2.0 / (std::log(3.5 / 3.0) + std::log(3.5 / 2.0))).epsilon(1e-14));
}

TEST_CASE("mle validation and duplicate policy") {
    PointCloud cloud = cube_cloud(30, 2, 7);
    MleOptions opt;
    opt.nbhd.k = 1;
    CHECK_THROWS_AS(mle_estimate(cloud, opt), std::invalid_argument);
    opt.nbhd.k = 2;
    opt.corrected = true;
    CHECK_THROWS_AS(mle_estimate(cloud, opt), std::invalid_argument);
    opt.nbhd.mode = NbhdSpec::Mode::Eps;
    opt.nbhd.eps = 0.3;
    CHECK_THROWS_AS(mle_estimate(cloud, opt), std::invalid_argument);

    // one duplicated pair out of 21 points: flagged, counted, tolerated
    // (quadratic spacing keeps every other neighbor ratio strict, and the
    // duplicate sits at the end so no third point sees a tie)
    Matrix X(21, 1);
    for (int i = 0; i < 21; ++i) X(i, 0) = i * i;
    X(20, 0) = X(19, 0);
    MleOptions plain;
    plain.nbhd.k = 2;
    EstimateReport rep = mle_estimate({X, {}}, plain);
    CHECK(rep.has_flag(FLAG_DEGENERATE));
    CHECK(rep.diagnostics.at("skipped_points") == 2.0);
    CHECK(std::isfinite(rep.estimate));

    // three coincident points out of five is past the 10% budget
    CHECK_THROWS_AS(mle_estimate(line_cloud({0, 0, 0, 1, 2}), plain), std::runtime_error);
}

TEST_CASE("mle concentration on a uniform square") {
    MleOptions opt;
    opt.nbhd.k = 12;
    opt.agg = Agg::HMean;
    EstimateReport rep = mle_estimate(cube_cloud(2000, 2, 11), opt);
    CHECK(rep.estimate > 1.8);
    CHECK(rep.estimate < 2.2);
}

TEST_CASE("tle skewed distance identities") {
    Eigen::RowVectorXd q(2), x(2), v(2);
    q << 0, 0;
    x << 1, 0;

    // measuring the center against its own sphere always gives r/2
    CHECK(tle_skewed_distance(q, 1.0, x, q) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(tle_skewed_distance(q, 3.0, x, q) == doctest::Approx(1.5).epsilon(1e-14));

    v << 0, 1;
    CHECK(tle_skewed_distance(q, 1.0, x, v) == doctest::Approx(1.0).epsilon(1e-14));

    // v - x orthogonal to q - x makes the denominator vanish
    v << 1, 1;
    CHECK(std::isinf(tle_skewed_distance(q, 1.0, x, v)));
}

TEST_CASE("tle concentration on a uniform square") {
    TleOptions opt;
    opt.k = 12;
    EstimateReport rep = tle_estimate(cube_cloud(1500, 2, 23), opt);
    CHECK(rep.estimate > 1.7);
    CHECK(rep.estimate < 2.3);
    CHECK_THROWS_AS(tle_estimate(cube_cloud(30, 2, 1), TleOptions{1, 1e-6, Agg::Mean}),
                    std::invalid_argument);
}

TEST_CASE("twonn concentration and discard effect") {
    TwonnOptions opt;
    EstimateReport rep = twonn_estimate(cube_cloud(3000, 2, 37), opt);
    CHECK(rep.estimate > 1.85);
    CHECK(rep.estimate < 2.15);

    // deterministic reruns agree bit for bit
    EstimateReport again = twonn_estimate(cube_cloud(3000, 2, 37), opt);
    CHECK(rep.estimate == again.estimate);

    TwonnOptions none;
    none.discard_fraction = 0.0;
    EstimateReport full = twonn_estimate(cube_cloud(3000, 2, 37), none);
    CHECK(full.estimate != rep.estimate); // the tail actually participates
    CHECK(full.estimate > 1.7);
    CHECK(full.estimate < 2.3);
}

TEST_CASE("gride at orders (1,2) solves the closed-form likelihood") {
    // with n2 - n1 = 1 the score is sum(1/d - log mu), so the optimum is
    // N / sum(log mu); the optimizer must land on it to high precision
    for (std::uint64_t seed : {1, 2, 3}) {
        for (int d : {2, 3, 5}) {
            PointCloud cloud = gaussian_cloud(80, d, seed * 10 + d);
            NeighborIndex nn = knn_query(cloud.points, 2);
            double s = 0.0;
            for (int i = 0; i < 80; ++i) s += std::log(nn.dists[i][1] / nn.dists[i][0]);
            double closed = 80.0 / s;

            EstimateReport rep = gride_estimate(cloud, GrideOptions{});
            CHECK(rep.estimate == doctest::Approx(closed).epsilon(1e-9));
        }
    }
}

TEST_CASE("gride flags an optimum pinned to the search boundary") {
    GrideOptions opt;
    opt.d_hi = 0.5; // far below the true dimension of a square
    EstimateReport rep = gride_estimate(cube_cloud(300, 2, 5), opt);
    CHECK(rep.has_flag(FLAG_NONCONVERGENT));

    opt = GrideOptions{};
    opt.n1 = 3;
    opt.n2 = 3;
    CHECK_THROWS_AS(gride_estimate(cube_cloud(50, 2, 1), opt), std::invalid_argument);
    opt.n2 = 60;
    CHECK_THROWS_AS(gride_estimate(cube_cloud(50, 2, 1), opt), std::invalid_argument);
}

TEST_CASE("mind continuous and integer variants") {
    PointCloud cloud = cube_cloud(400, 2, 13);

    // k = 1 continuous version shares the two-NN closed form
    NeighborIndex nn = knn_query(cloud.points, 2);
    double s = 0.0;
    for (int i = 0; i < 400; ++i) s += std::log(nn.dists[i][1] / nn.dists[i][0]);
    MindOptions opt;
    EstimateReport ml = mind_estimate(cloud, opt);
    CHECK(ml.estimate == doctest::Approx(400.0 / s).epsilon(1e-9));

    opt.k = 5;
    opt.ver = MindOptions::Ver::MLi;
    EstimateReport mi = mind_estimate(cloud, opt);
    CHECK(mi.estimate == 2.0);
}

TEST_CASE("integer knn-ratio likelihood recovers the sampling dimension") {
    // draw rho from the neighbor-ratio law by CDF inversion and ask for the
    // integer maximum-likelihood dimension back
    const int k = 3, d = 5;
    dimest::Rng rng(99);
    std::vector<double> rho(4000);
    for (double& r : rho) {
        double u = rng.uniform_pos();
        r = std::pow(1.0 - std::pow(1.0 - u, 1.0 / k), 1.0 / d);
    }
    CHECK(knn_ratio_ml_integer(rho, k, 10) == d);
    CHECK(knn_ratio_ml_integer(rho, k, 3) == 3); // honest clamp at the cap
}

TEST_CASE("ess skewness specials and inverse") {
    CHECK(ess_skewness(1.0) == 0.0);
    CHECK(ess_skewness(2.0) == doctest::Approx(2.0 / M_PI).epsilon(1e-12));
    CHECK(ess_skewness(3.0) == doctest::Approx(M_PI / 4.0).epsilon(1e-12));

    double prev = 0.0;
    for (double d = 1.0; d <= 24.0; d += 0.5) {
        double s = ess_skewness(d);
        CHECK(s >= prev);
        prev = s;
    }

    for (double d : {1.5, 2.0, 3.5, 7.0, 15.0}) {
        auto [est, clamped] = ess_skewness_inverse(ess_skewness(d), 24.0);
        CHECK(!clamped);
        CHECK(est == doctest::Approx(d).epsilon(1e-3));
    }
    auto [hi, clamped] = ess_skewness_inverse(ess_skewness(30.0), 10.0);
    CHECK(clamped);
    CHECK(hi == 10.0);
    CHECK(ess_skewness_inverse(-0.5, 10.0).first == 1.0);
    CHECK_THROWS_AS(ess_skewness_inverse(0.5, 1.0), std::invalid_argument);
}

TEST_CASE("ess estimator exact on a line, banded on a square") {
    // collinear data: every neighbor triangle is degenerate, skewness 0
    Matrix X(30, 2);
    for (int i = 0; i < 30; ++i) X.row(i) = Eigen::RowVector2d(i, 2.0 * i);
    EssOptions opt;
    opt.k = 6;
    EstimateReport line = ess_estimate({X, {}}, opt);
    CHECK(line.estimate == doctest::Approx(1.0).epsilon(1e-4));

    opt.k = 10;
    EstimateReport sq = ess_estimate(cube_cloud(800, 2, 3), opt);
    CHECK(sq.estimate > 1.7);
    CHECK(sq.estimate < 2.4);
}

TEST_CASE("ess pair sampling is seeded and clamping flags") {
    PointCloud cloud = cube_cloud(300, 2, 17);
    EssOptions opt;
    opt.k = 70; // 2415 pairs, beyond the 2000 budget
    EstimateReport a = ess_estimate(cloud, opt);
    EstimateReport b = ess_estimate(cloud, opt);
    CHECK(a.diagnostics.at("sampled_pairs") == 2000.0);
    CHECK(a.estimate == b.estimate);
    opt.seed = 1;
    EstimateReport c = ess_estimate(cloud, opt);
    CHECK(c.estimate != a.estimate);

    // an inversion ceiling below the data dimension must clamp and flag
    EssOptions tight;
    tight.k = 10;
    tight.d_hi_factor = 0.55; // ceiling 1.1 for 2-column data
    EstimateReport t = ess_estimate(cloud, tight);
    CHECK(t.has_flag(FLAG_THROTTLED));
}

TEST_CASE("correlation integral on hand radii") {
    PointCloud cloud = line_cloud({0, 1, 2});
    CorrIntOptions opt;
    opt.r1 = 1.5; // pairs within: (0,1), (1,2)
    opt.r2 = 2.5; // all three pairs
    EstimateReport rep = corrint_estimate(cloud, opt);
    CHECK(rep.estimate ==
          doctest::Approx((std::log(3.0) - std::log(2.0)) /
                          (std::log(2.5) - std::log(1.5))).epsilon(1e-12));
    CHECK(rep.diagnostics.at("pairs_r1") == 2.0);
    CHECK(rep.diagnostics.at("pairs_r2") == 3.0);

    opt.r1 = 0.5; // no pair fits inside
    CHECK_THROWS_AS(corrint_estimate(cloud, opt), std::runtime_error);

    opt.r1 = 2.5; // both counts saturate: slope zero, flagged
    opt.r2 = 3.5;
    EstimateReport flat = corrint_estimate(cloud, opt);
    CHECK(flat.has_flag(FLAG_SLOPE_HAZARD));
    CHECK(flat.estimate == 0.0);

    CorrIntOptions ranks; // rank-derived scales on a real cloud
    EstimateReport sq = corrint_estimate(cube_cloud(1200, 2, 29), ranks);
    CHECK(sq.estimate > 1.6);
    CHECK(sq.estimate < 2.3);
}

TEST_CASE("packing numbers: greedy against exhaustive") {
    Matrix X(4, 1);
    X << 0, 0.5, 1, 2;
    CHECK(greedy_packing_number(X, 0.6) == 3);
    CHECK(exhaustive_packing_number(X, 0.6) == 3);

    int agree = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        Matrix Y = cube_cloud(10, 2, 1000 + t).points;
        int g = greedy_packing_number(Y, 0.15);
        int e = exhaustive_packing_number(Y, 0.15);
        CHECK(g <= e);
        CHECK(2 * g >= e); // greedy maximal packings are 2-approximations
        if (g == e) ++agree;
    }
    CHECK(agree >= trials * 8 / 10);

    CHECK_THROWS_AS(greedy_packing_number(X, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(exhaustive_packing_number(cube_cloud(25, 2, 1).points, 0.1),
                    std::invalid_argument);
}

TEST_CASE("packing estimator hand case and saturation flag") {
    Matrix X(6, 1);
    X << 0, 0.4, 1, 1.6, 2.5, 4;
    PackingOptions opt;
    opt.r1 = 0.5; // packs all but 0.4 -> 5
    opt.r2 = 1.2; // greedy keeps 0, 1.6, 4 -> 3
    EstimateReport rep = packing_estimate({X, {}}, opt);
    CHECK(rep.diagnostics.at("m1") == 5.0);
    CHECK(rep.diagnostics.at("m2") == 3.0);
    CHECK(rep.estimate ==
          doctest::Approx((std::log(5.0) - std::log(3.0)) /
                          (std::log(1.2) - std::log(0.5))).epsilon(1e-12));

    opt.r2 = 0.6; // same packing at both scales
    EstimateReport flat = packing_estimate({X, {}}, opt);
    CHECK(flat.has_flag(FLAG_SLOPE_HAZARD));
    CHECK(flat.estimate == 0.0);
}

TEST_CASE("doubling locals on an integer line") {
    Matrix X(11, 1);
    for (int i = 0; i < 11; ++i) X(i, 0) = i;
    DoublingOptions opt;
    opt.k = 2;
    EstimateReport rep = doubling_estimate({X, {}}, opt);
    REQUIRE(rep.locals->size() == 11);
    // ends and their neighbors see a clipped 2-ball of 4; the interior grows
    // from 3 to 5
    for (int i : {0, 1, 9, 10})
        CHECK((*rep.locals)[i] == doctest::Approx(std::log2(4.0 / 3.0)).epsilon(1e-14));
    for (int i = 2; i <= 8; ++i)
        CHECK((*rep.locals)[i] == doctest::Approx(std::log2(5.0 / 3.0)).epsilon(1e-14));
    CHECK(!rep.has_flag(FLAG_THROTTLED));

    // every local obeys the graph-growth ceiling log2((k^2+k+1)/(k+1))
    for (int k : {1, 2, 3, 5}) {
        DoublingOptions o;
        o.k = k;
        EstimateReport r = doubling_estimate(gaussian_cloud(150, 6, 40 + k), o);
        double bound = std::log2((static_cast<double>(k) * (k + 1) + 1) / (k + 1));
        for (double v : *r.locals) CHECK(v <= bound + 1e-12);
    }

    // sparse high-dimensional neighborhoods reach the tree-like cap
    DoublingOptions sparse;
    sparse.k = 2;
    EstimateReport capped = doubling_estimate(gaussian_cloud(200, 8, 51), sparse);
    CHECK(capped.has_flag(FLAG_THROTTLED));
}

TEST_CASE("cap fraction values, monotonicity and inversion") {
    CHECK(cap_fraction(0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(cap_fraction(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cap_fraction(2.0) ==
          doctest::Approx(2.0 / 3.0 - std::sqrt(3.0) / (2.0 * M_PI)).epsilon(1e-9));

    double prev = 1.0;
    for (double d = 0.0; d <= 20.0; d += 0.25) {
        double s = cap_fraction(d);
        CHECK(s < prev);
        prev = s;
    }

    for (double target : {0.6, 0.5, 0.39, 0.2, 0.05}) {
        double d = cap_fraction_inverse(target);
        CHECK(std::fabs(cap_fraction(d) - target) < 1e-9);
    }
    CHECK(cap_fraction_inverse(2.0 / 3.0) == 0.0);
    CHECK(cap_fraction_inverse(0.9) == 0.0);
    CHECK_THROWS_AS(cap_fraction_inverse(0.0), std::invalid_argument);
    CHECK_THROWS_AS(cap_fraction_inverse(-0.1), std::invalid_argument);
}

TEST_CASE("lens fractions respect their floor and the estimate its ceiling") {
    dimest::Rng rng(61);
    Matrix X = Matrix::Zero(400, 3);
    for (int i = 0; i < 400; ++i) {
        X(i, 0) = rng.uniform();
        X(i, 1) = rng.uniform();
    }
    for (int k : {5, 10, 20}) {
        WodcapOptions opt;
        opt.k = k;
        EstimateReport rep = wodcap_estimate({X, {}}, opt);
        // the pair itself always sits inside the lens
        for (double f : *rep.locals) CHECK(f >= 2.0 / (k + 1.0) - 1e-12);
        CHECK(rep.estimate <= cap_fraction_inverse(2.0 / (k + 1.0)) + 1e-9);
        CHECK(rep.estimate > 0.0);
    }

    WodcapOptions graph;
    graph.k = 10;
    graph.graph_lens = true;
    EstimateReport g = wodcap_estimate({X, {}}, graph);
    CHECK(g.locals->size() == 400);
    CHECK(g.estimate >= 0.0);

    // fully coincident data: every lens fraction is 1, the inversion refuses
    Matrix same = Matrix::Zero(8, 2);
    WodcapOptions opt;
    opt.k = 2;
    EstimateReport dg = wodcap_estimate({same, {}}, opt);
    CHECK(dg.has_flag(FLAG_DEGENERATE));
    CHECK(dg.estimate == 0.0);

    CHECK_THROWS_AS(wodcap_estimate({X, {}}, WodcapOptions{1, Agg::Mean, false}),
                    std::invalid_argument);
}

TEST_CASE("idea hand case and jackknife determinism") {
    EstimateReport rep = idea_estimate(line_cloud({0, 1, 3}), IdeaOptions{1});
    // neighbor ratios 1/3, 1/2, 2/3 average to exactly 1/2
    CHECK(rep.estimate == doctest::Approx(1.0).epsilon(1e-12));

    IdeaOptions jk;
    jk.k = 10;
    jk.jackknife = true;
    PointCloud cloud = cube_cloud(400, 2, 43);
    EstimateReport a = idea_estimate(cloud, jk);
    EstimateReport b = idea_estimate(cloud, jk);
    CHECK(a.estimate == b.estimate);
    CHECK(a.diagnostics.at("fit_points") == 6.0);
    CHECK(a.estimate > 1.4);
    CHECK(a.estimate < 2.6);

    EstimateReport plain = idea_estimate(cloud, IdeaOptions{10});
    CHECK(plain.estimate > 1.4);
    CHECK(plain.estimate < 2.3);
}

TEST_CASE("pettis estimator band and validation") {
    EstimateReport rep = pettis_estimate(cube_cloud(1000, 2, 53), PettisOptions{});
    CHECK(rep.estimate > 1.6);
    CHECK(rep.estimate < 2.4);

    PettisOptions bad;
    bad.k_min = 5;
    bad.k_max = 5;
    CHECK_THROWS_AS(pettis_estimate(cube_cloud(50, 2, 1), bad), std::invalid_argument);
    bad.k_max = 60;
    CHECK_THROWS_AS(pettis_estimate(cube_cloud(50, 2, 1), bad), std::invalid_argument);
}
