#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <dimest/datasets.hpp>
#include <dimest/harness.hpp>
#include <dimest/parametric.hpp>
#include <dimest/registry.hpp>
#include <dimest/rng.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace dimest;
using nlohmann::json;

TEST_CASE("registry lists every estimator with a family and a schema") {
    const auto& es = list_estimators();
    std::vector<std::string> ids;
    for (const auto& e : es) ids.push_back(e.id);
    std::vector<std::string> want = {"lpca", "cdim",    "mle",     "tle",  "twonn",
                                     "gride", "mind_ml", "danco",   "ess",  "corrint",
                                     "packing", "doubling", "wodcap", "idea", "pettis",
                                     "ph0",   "knn",     "magnitude"};
    CHECK(ids == want);

    int tangential = 0, parametric = 0, graph = 0;
    for (const auto& e : es) {
        CHECK(!e.summary.empty());
        if (e.family == "tangential") ++tangential;
        else if (e.family == "parametric") ++parametric;
        else if (e.family == "graph") ++graph;
        else FAIL("unexpected family ", e.family, " for ", e.id);
        for (const auto& p : e.params) {
            CHECK(!p.name.empty());
            CHECK(!p.def.is_null());
            if (p.kind == ParamSpec::Kind::Choice) CHECK(!p.choices.empty());
        }
    }
    CHECK(tangential == 2);
    CHECK(parametric == 13);
    CHECK(graph == 3);

    CHECK(estimator_info("lpca").family == "tangential");
    CHECK(estimator_info("knn").family == "graph");
    CHECK_THROWS_AS(estimator_info("bogus"), std::invalid_argument);
}

TEST_CASE("resolve_params applies defaults and rejects malformed input by key") {
    json p = resolve_params("mle", json::object());
    CHECK(p["k"] == 10);
    CHECK(p["nbhd"] == "knn");
    CHECK(p["corrected"] == false);
    CHECK(p["agg"] == "mean");

    json q = resolve_params("mle", {{"k", 25}, {"agg", "hmean"}});
    CHECK(q["k"] == 25);
    CHECK(q["agg"] == "hmean");
    CHECK(q["corrected"] == false);

    try {
        resolve_params("mle", {{"kneighbors", 3}});
        FAIL("unknown key accepted");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("kneighbors") != std::string::npos);
    }
    CHECK_THROWS_AS(resolve_params("mle", {{"agg", "bogus"}}), std::invalid_argument);
    CHECK_THROWS_AS(resolve_params("mle", {{"k", "five"}}), std::invalid_argument);
    CHECK_THROWS_AS(resolve_params("mle", {{"k", 2.5}}), std::invalid_argument);
    CHECK_THROWS_AS(resolve_params("mle", {{"corrected", 3}}), std::invalid_argument);
    CHECK(resolve_params("mle", {{"k", 25.0}})["k"] == 25); // whole-valued doubles coerce
    CHECK_THROWS_AS(resolve_params("nope", json::object()), std::invalid_argument);
}

TEST_CASE("run_estimator is the same computation as a direct call") {
    PointCloud c = generate("M7_Roll", 300, 4);

    EstimateReport via = run_estimator("mle", c, {{"k", 8}, {"agg", "hmean"}});
    MleOptions opt;
    opt.nbhd.k = 8;
    opt.agg = Agg::HMean;
    EstimateReport direct = mle_estimate(c, opt);
    CHECK(via.estimate == direct.estimate);
    REQUIRE(via.locals.has_value());
    CHECK(*via.locals == *direct.locals);

    EstimateReport t1 = run_estimator("twonn", c, json::object());
    EstimateReport t2 = twonn_estimate(c, TwonnOptions{});
    CHECK(t1.estimate == t2.estimate);
}

TEST_CASE("run_estimator seeds randomized internals reproducibly") {
    PointCloud c = generate("M1_Sphere", 500, 9);
    json params = {{"k", 40}, {"max_pairs", 2000}};
    EstimateReport a = run_estimator("ess", c, params, 123);
    EstimateReport b = run_estimator("ess", c, params, 123);
    EstimateReport d = run_estimator("ess", c, params, 124);
    CHECK(a.estimate == b.estimate);
    CHECK(a.estimate != d.estimate);
}

TEST_CASE("expand_grid walks the cartesian product with the first key slowest") {
    auto grid = expand_grid("mle", {{"k", {json(5), json(10)}},
                                    {"agg", {json("mean"), json("hmean")}}});
    REQUIRE(grid.size() == 4);
    CHECK(grid[0].params == json({{"k", 5}, {"agg", "mean"}}));
    CHECK(grid[1].params == json({{"k", 5}, {"agg", "hmean"}}));
    CHECK(grid[2].params == json({{"k", 10}, {"agg", "mean"}}));
    CHECK(grid[3].params == json({{"k", 10}, {"agg", "hmean"}}));
    for (const auto& e : grid) CHECK(e.estimator == "mle");

    CHECK(expand_grid("twonn", {}).size() == 1);
    CHECK_THROWS_AS(expand_grid("mle", {{"k", {}}}), std::invalid_argument);
    CHECK_THROWS_AS(expand_grid("mle", {{"zz", {json(1)}}}), std::invalid_argument);
    CHECK_THROWS_AS(expand_grid("mle", {{"agg", {json("p99")}}}), std::invalid_argument);
}

TEST_CASE("parse_bench_config reads the line format, commas in parens intact") {
    std::istringstream in(
        "# sweep for the small table\n"
        "datasets = M1_Sphere, Torus(2,0.5)  # trailing note\n"
        "sizes    = 100, 200\n"
        "runs     = 3\n"
        "seed     = 7\n"
        "estimator = mle k={5,10} agg=hmean\n"
        "\n"
        "estimator = twonn\n");
    BenchConfig cfg = parse_bench_config(in);
    CHECK(cfg.datasets == std::vector<std::string>{"M1_Sphere", "Torus(2,0.5)"});
    CHECK(cfg.sizes == std::vector<int>{100, 200});
    CHECK(cfg.runs == 3);
    CHECK(cfg.seed == 7);
    REQUIRE(cfg.grid.size() == 3);
    CHECK(cfg.grid[0].estimator == "mle");
    CHECK(cfg.grid[0].params == json({{"k", 5}, {"agg", "hmean"}}));
    CHECK(cfg.grid[1].params == json({{"k", 10}, {"agg", "hmean"}}));
    CHECK(cfg.grid[2].estimator == "twonn");
    CHECK(cfg.grid[2].params == json::object());

    std::istringstream bad("sizzes = 4\n");
    CHECK_THROWS_AS(parse_bench_config(bad), std::invalid_argument);
    std::istringstream badest("estimator = mle zz=3\n");
    CHECK_THROWS_AS(parse_bench_config(badest), std::invalid_argument);
}

TEST_CASE("bench_run fills the dataset/size/grid cube deterministically") {
    BenchConfig cfg;
    cfg.datasets = {"M5a_Helix1d", "M7_Roll"};
    cfg.sizes = {120, 200};
    cfg.runs = 2;
    cfg.seed = 5;
    cfg.grid = {{"twonn", json::object()}, {"mle", {{"k", 6}}}};

    BenchResult r = bench_run(cfg);
    REQUIRE(r.cells.size() == 2 * 2 * 2);
    // dataset-major, then size, then grid
    CHECK(r.cells[0].dataset == "M5a_Helix1d");
    CHECK(r.cells[0].n == 120);
    CHECK(r.cells[0].estimator == "twonn");
    CHECK(r.cells[1].estimator == "mle");
    CHECK(r.cells[1].params["k"] == 6);
    CHECK(r.cells[1].params["agg"] == "mean"); // defaults resolved
    CHECK(r.cells[2].n == 200);
    CHECK(r.cells[4].dataset == "M7_Roll");
    for (const auto& c : r.cells) {
        CHECK(c.values.size() == 2);
        CHECK(c.errors.empty());
        CHECK(c.grid_index >= 0);
        CHECK(std::isfinite(c.mean));
        double lo = std::min(c.values[0], c.values[1]);
        double hi = std::max(c.values[0], c.values[1]);
        CHECK(c.median >= lo);
        CHECK(c.median <= hi);
        CHECK(c.true_dim == (c.dataset == "M7_Roll" ? 2.0 : 1.0));
    }

    BenchResult again = bench_run(cfg);
    for (std::size_t i = 0; i < r.cells.size(); ++i)
        CHECK(r.cells[i].values == again.cells[i].values);

    // identical grid entries see identical clouds
    BenchConfig twin = cfg;
    twin.grid = {{"mle", {{"k", 6}}}, {"mle", {{"k", 6}}}};
    BenchResult tw = bench_run(twin);
    for (std::size_t i = 0; i + 1 < tw.cells.size(); i += 2)
        CHECK(tw.cells[i].values == tw.cells[i + 1].values);

    BenchConfig one = cfg;
    one.runs = 1;
    for (const auto& c : bench_run(one).cells) CHECK(c.stddev == 0.0);
}

TEST_CASE("bench_run records per-run failures without aborting the sweep") {
    BenchConfig cfg;
    cfg.datasets = {"M5a_Helix1d"};
    cfg.sizes = {30};
    cfg.runs = 2;
    cfg.grid = {{"lpca", {{"k", 80}}}, {"twonn", json::object()}};
    BenchResult r = bench_run(cfg);
    REQUIRE(r.cells.size() == 2);
    const BenchCell& broken = r.cells[0];
    CHECK(broken.errors.size() == 2);
    CHECK(std::isnan(broken.values[0]));
    CHECK(std::isnan(broken.values[1]));
    CHECK(std::isnan(broken.mean));
    const BenchCell& fine = r.cells[1];
    CHECK(fine.errors.empty());
    CHECK(std::isfinite(fine.mean));
}

TEST_CASE("bench results round-trip through json and export as csv") {
    BenchConfig cfg;
    cfg.datasets = {"M5a_Helix1d"};
    cfg.sizes = {100};
    cfg.runs = 2;
    cfg.seed = 3;
    cfg.grid = {{"twonn", json::object()}, {"mle", {{"k", 7}}}};
    BenchResult r = bench_run(cfg);

    BenchResult back = bench_from_json(bench_to_json(r));
    CHECK(back.config.datasets == cfg.datasets);
    CHECK(back.config.sizes == cfg.sizes);
    CHECK(back.config.runs == cfg.runs);
    CHECK(back.config.seed == cfg.seed);
    REQUIRE(back.cells.size() == r.cells.size());
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        CHECK(back.cells[i].dataset == r.cells[i].dataset);
        CHECK(back.cells[i].values == r.cells[i].values);
        CHECK(back.cells[i].params == r.cells[i].params);
        CHECK(back.cells[i].mean == r.cells[i].mean);
    }

    std::ostringstream csv;
    bench_to_csv(r, csv);
    std::string text = csv.str();
    CHECK(text.find("dataset") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + static_cast<long>(r.cells.size()));
}

namespace {

// a benchmark table built by hand: one size, any number of estimators/settings
struct ToyTable {
    std::vector<std::string> datasets;
    std::vector<double> dims;
    std::vector<GridEntry> grid;
    std::vector<std::vector<double>> means; // [grid][dataset]
};

BenchResult make_result(const ToyTable& t, int n = 100) {
    BenchResult r;
    r.config.datasets = t.datasets;
    r.config.sizes = {n};
    r.config.runs = 1;
    r.config.grid = t.grid;
    for (std::size_t di = 0; di < t.datasets.size(); ++di)
        for (std::size_t gi = 0; gi < t.grid.size(); ++gi) {
            BenchCell c;
            c.dataset = t.datasets[di];
            c.true_dim = t.dims[di];
            c.n = n;
            c.estimator = t.grid[gi].estimator;
            c.grid_index = static_cast<int>(gi);
            c.params = t.grid[gi].params;
            double v = t.means[gi][di];
            c.values = {v};
            c.errors = std::isnan(v) ? std::vector<std::string>{"boom"}
                                     : std::vector<std::string>{};
            c.mean = c.median = v;
            c.stddev = 0.0;
            r.cells.push_back(std::move(c));
        }
    return r;
}

} // namespace

TEST_CASE("select_hyperparams reproduces a hand-worked table") {
    ToyTable t;
    t.datasets = {"A", "B", "C"};
    t.dims = {2.0, 4.0, 8.0};
    for (int h = 0; h < 4; ++h) t.grid.push_back({"e1", {{"h", h}}});
    for (int h = 0; h < 4; ++h) t.grid.push_back({"e2", {{"h", h}}});
    t.means = {
        {2.2, 4.5, 7.0}, // e1 h0: abs errors .2 .5 1.0 -> median .5
        {1.9, 4.2, 8.4}, // e1 h1: .1 .2 .4 -> .2
        {2.05, 3.8, 8.2}, // e1 h2: .05 .2 .2 -> .2 (ties h1; h1 is earlier)
        {3.0, 4.5, 8.5}, // e1 h3: 1.0 .5 .5 -> .5
        {2.0, 4.1, 8.3}, // e2 h0
        {2.5, 4.0, 8.0}, // e2 h1: zero error on B and C
        {2.6, 4.6, 8.9}, // e2 h2
        {2.7, 4.7, 9.0}, // e2 h3
    };

    SelectionResult s = select_hyperparams(make_result(t));
    REQUIRE(s.rows.size() == 2);

    const SelectionRow& e1 = s.rows[0];
    CHECK(e1.estimator == "e1");
    CHECK(e1.n == 100);
    CHECK(e1.med_abs.grid_index == 1); // tie with h2 at 0.2 goes to the earlier entry
    CHECK(e1.med_abs.score == doctest::Approx(0.2));
    CHECK(e1.med_rel.grid_index == 2); // relative medians: .125 .05 .025 .125
    CHECK(e1.med_rel.score == doctest::Approx(0.025));
    CHECK(e1.best.at("A").grid_index == 2);
    CHECK(e1.best.at("B").grid_index == 1); // .5 .2 .2 .5: h1 beats h2 on order
    CHECK(e1.best.at("C").grid_index == 2);
    CHECK(e1.d_best.at("A") == doctest::Approx(2.05));
    CHECK(e1.d_best.at("B") == doctest::Approx(4.2));
    CHECK(e1.d_best.at("C") == doctest::Approx(8.2));
    CHECK(e1.d_abs.at("A") == doctest::Approx(1.9));
    CHECK(e1.d_abs.at("B") == doctest::Approx(4.2));
    CHECK(e1.d_abs.at("C") == doctest::Approx(8.4));
    CHECK(e1.d_rel.at("A") == doctest::Approx(2.05));
    CHECK(e1.d_rel.at("B") == doctest::Approx(3.8));
    CHECK(e1.d_rel.at("C") == doctest::Approx(8.2));

    const SelectionRow& e2 = s.rows[1];
    CHECK(e2.estimator == "e2");
    CHECK(e2.med_abs.grid_index == 5); // global grid index of e2's h1
    CHECK(e2.med_abs.score == doctest::Approx(0.0));
    CHECK(e2.med_rel.grid_index == 5);
    CHECK(e2.best.at("A").grid_index == 4);
    CHECK(e2.best.at("B").grid_index == 5);
    CHECK(e2.best.at("C").grid_index == 5);
    CHECK(e2.d_best.at("A") == doctest::Approx(2.0));
    CHECK(e2.d_abs.at("B") == doctest::Approx(4.0));
    CHECK(e2.d_rel.at("C") == doctest::Approx(8.0));

    std::ostringstream csv;
    selection_to_csv(s, csv);
    CHECK(csv.str().find("e1") != std::string::npos);
    json js = selection_to_json(s);
    CHECK(js.is_array());
    CHECK(js.size() == 2);
}

TEST_CASE("failed cells count as infinite error in selection") {
    ToyTable t;
    t.datasets = {"D"};
    t.dims = {3.0};
    t.grid = {{"e", {{"h", 0}}}, {"e", {{"h", 1}}}};
    t.means = {{std::numeric_limits<double>::quiet_NaN()}, {8.0}};
    SelectionResult s = select_hyperparams(make_result(t));
    REQUIRE(s.rows.size() == 1);
    CHECK(s.rows[0].best.at("D").grid_index == 1);
    CHECK(s.rows[0].med_abs.grid_index == 1);
    CHECK(s.rows[0].med_abs.score == doctest::Approx(5.0));
    CHECK(s.rows[0].med_rel.grid_index == 1);
    CHECK(s.rows[0].d_best.at("D") == doctest::Approx(8.0));
}

TEST_CASE("per-dataset best never loses to the median picks") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = Rng::stream(seed, 0x5E1);
        ToyTable t;
        t.datasets = {"A", "B", "C"};
        t.dims = {2.0, 5.0, 9.0};
        for (int h = 0; h < 6; ++h) t.grid.push_back({"e", {{"h", h}}});
        t.means.resize(6);
        for (auto& row : t.means)
            for (double d : t.dims) row.push_back(d * (0.5 + 1.5 * rng.uniform()));

        SelectionResult s = select_hyperparams(make_result(t));
        REQUIRE(s.rows.size() == 1);
        const SelectionRow& row = s.rows[0];

        // brute-force the median criteria
        auto median3 = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            return v[1];
        };
        int want_abs = -1, want_rel = -1;
        double best_abs = 0, best_rel = 0;
        for (int h = 0; h < 6; ++h) {
            std::vector<double> ae, re;
            for (std::size_t di = 0; di < 3; ++di) {
                ae.push_back(std::fabs(t.means[h][di] - t.dims[di]));
                re.push_back(std::fabs(t.means[h][di] - t.dims[di]) / t.dims[di]);
            }
            double ma = median3(ae), mr = median3(re);
            if (want_abs < 0 || ma < best_abs) want_abs = h, best_abs = ma;
            if (want_rel < 0 || mr < best_rel) want_rel = h, best_rel = mr;
        }
        CHECK(row.med_abs.grid_index == want_abs);
        CHECK(row.med_rel.grid_index == want_rel);

        for (std::size_t di = 0; di < 3; ++di) {
            const std::string& ds = t.datasets[di];
            double eb = std::fabs(row.d_best.at(ds) - t.dims[di]);
            CHECK(eb <= std::fabs(row.d_abs.at(ds) - t.dims[di]) + 1e-12);
            CHECK(eb <= std::fabs(row.d_rel.at(ds) - t.dims[di]) + 1e-12);
        }
    }
}

TEST_CASE("noise sweep shares clean cells and records the chosen setting") {
    NoiseConfig cfg;
    cfg.n = 100;
    cfg.runs = 1;
    cfg.seed = 11;
    cfg.gaussian_sds = {0.0, 0.3};
    cfg.outlier_counts = {0, 8};
    cfg.grid = {{"mle", {{"k", 6}}}};

    NoiseResult r = noise_experiment(cfg);
    REQUIRE(r.chosen.count("mle") == 1);
    CHECK(r.chosen.at("mle").grid_index == 0);
    REQUIRE(r.cells.size() == 3 * 4); // three clouds, two levels per corruption kind

    std::set<std::string> datasets;
    for (const auto& c : r.cells) {
        datasets.insert(c.dataset);
        CHECK((c.kind == "gaussian" || c.kind == "outliers"));
        CHECK(c.values.size() == 1);
        CHECK(std::isfinite(c.mean));
    }
    CHECK(datasets.size() == 3);

    for (const std::string& ds : datasets) {
        const NoiseCell *g0 = nullptr, *o0 = nullptr;
        for (const auto& c : r.cells)
            if (c.dataset == ds && c.level == 0.0) {
                if (c.kind == "gaussian") g0 = &c;
                else o0 = &c;
            }
        REQUIRE(g0 != nullptr);
        REQUIRE(o0 != nullptr);
        CHECK(g0->values == o0->values);
    }

    NoiseResult again = noise_experiment(cfg);
    for (std::size_t i = 0; i < r.cells.size(); ++i)
        CHECK(r.cells[i].values == again.cells[i].values);

    std::ostringstream csv;
    noise_to_csv(r, csv);
    CHECK(csv.str().find("gaussian") != std::string::npos);
    CHECK(noise_to_json(r).contains("cells"));
}

TEST_CASE("tube-angle area CDF matches its own density") {
    const double R = 2.0, r = 1.0, PI = 3.14159265358979323846;
    CHECK(torus_angle_area_cdf(0.0, R, r) == 0.0);
    CHECK(torus_angle_area_cdf(PI, R, r) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 0.0;
    for (double t : {0.3, 0.9, 1.4, 2.0, 2.7, 3.1}) {
        // Simpson over the density (R - r cos u) / (pi R)
        const int m = 2000;
        double h = t / m, acc = 0.0;
        for (int i = 0; i <= m; ++i) {
            double u = i * h;
            double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += w * (R - r * std::cos(u)) / (PI * R);
        }
        acc *= h / 3.0;
        double F = torus_angle_area_cdf(t, R, r);
        CHECK(F == doctest::Approx(acc).epsilon(1e-10));
        CHECK(F > prev);
        prev = F;
    }
}

TEST_CASE("torus overestimation report is a sorted per-point table") {
    TorusCdfConfig cfg;
    cfg.R = 2.0;
    cfg.r = 1.0;
    cfg.n = 300;
    cfg.estimator = "lpca";
    cfg.params = {{"k", 20}};
    cfg.seed = 3;
    TorusCdfResult res = torus_overestimate_cdf(cfg);
    REQUIRE(res.points.size() == 300);
    int over = 0;
    const double PI = 3.14159265358979323846;
    for (std::size_t i = 0; i < res.points.size(); ++i) {
        const auto& p = res.points[i];
        CHECK(p.t == doctest::Approx(std::fabs(p.phi - PI)).epsilon(1e-12));
        CHECK(p.t >= 0.0);
        CHECK(p.t <= PI + 1e-12);
        if (i) CHECK(p.t >= res.points[i - 1].t);
        over += p.over;
    }
    CHECK(res.n_over == over);
    CHECK(res.ks_stat >= 0.0);
    CHECK(res.ks_stat <= 1.0);
    CHECK(res.ks_p >= 0.0);
    CHECK(res.ks_p <= 1.0);

    std::ostringstream csv;
    torus_to_csv(res, csv);
    CHECK(csv.str().find("phi") != std::string::npos);

    TorusCdfConfig bad = cfg;
    bad.estimator = "twonn"; // fits one global line, no per-point estimates
    bad.params = json::object();
    CHECK_THROWS_AS(torus_overestimate_cdf(bad), std::runtime_error);
}

TEST_CASE("paraboloid pointwise scan covers the (b, k) grid") {
    ParaboloidConfig cfg;
    cfg.b_grid = {1.0, 2.0};
    cfg.estimator = "lpca";
    cfg.k_min = 20;
    cfg.k_max = 40;
    cfg.k_step = 10;
    cfg.reps = 4;
    cfg.base_count = 300;
    cfg.seed = 2;
    ParaboloidResult r = paraboloid_pointwise(cfg);
    REQUIRE(r.rows.size() == 6);
    for (const auto& row : r.rows) {
        CHECK((row.k == 20 || row.k == 30 || row.k == 40));
        CHECK(row.mean >= 0.0);
        CHECK(row.mean <= 1.0); // share of reps seeing a surface
        double want_k2 = 2.0 / (row.b * row.b);
        CHECK(row.kappa2 == doctest::Approx(want_k2));
    }
    REQUIRE(r.summary.size() == 2);
    CHECK(r.summary[0].b == 1.0);
    CHECK(r.summary[0].n == 300);
    int n2 = static_cast<int>(std::lround(300.0 * paraboloid_area(2.0) / paraboloid_area(1.0)));
    CHECK(r.summary[1].n == n2);
    for (const auto& s : r.summary) {
        CHECK(s.mean_count >= 0.0);
        CHECK(s.mean_count <= 3.0);
        CHECK(s.mean_largest <= 40.0);
    }
    std::ostringstream csv;
    paraboloid_to_csv(r, csv);
    CHECK(!csv.str().empty());

    ParaboloidConfig m = cfg;
    m.estimator = "mle";
    m.reps = 3;
    ParaboloidResult rm = paraboloid_pointwise(m);
    CHECK(rm.rows.size() == 6);
    CHECK(rm.summary.empty());
    for (const auto& row : rm.rows) {
        CHECK(row.mean > 0.5);
        CHECK(row.mean < 4.0);
    }
}
