#include "dimest/registry.hpp"

#include "dimest/geometry.hpp"
#include "dimest/graph_estimators.hpp"
#include "dimest/magnitude.hpp"
#include "dimest/parametric.hpp"
#include "dimest/tangential.hpp"

#include <cmath>
#include <stdexcept>

namespace dimest {

namespace {

using Kind = ParamSpec::Kind;

std::vector<EstimatorInfo> build_registry() {
    auto num = [](const char* n, double d, const char* h) {
        return ParamSpec{n, Kind::Number, d, {}, h};
    };
    auto integer = [](const char* n, int d, const char* h) {
        return ParamSpec{n, Kind::Integer, d, {}, h};
    };
    auto flag = [](const char* n, bool d, const char* h) {
        return ParamSpec{n, Kind::Flag, d, {}, h};
    };
    auto choice = [](const char* n, const char* d, std::vector<std::string> cs, const char* h) {
        return ParamSpec{n, Kind::Choice, d, std::move(cs), h};
    };
    std::vector<std::string> aggs = {"mean", "hmean", "median"};

    std::vector<EstimatorInfo> r;
    r.push_back({"lpca",
                 "tangential",
                 "local PCA with a spectral cutoff",
                 {choice("nbhd", "knn", {"knn", "eps"}, "neighborhood form"),
                  integer("k", 10, "neighbors (also sets eps when eps=0)"),
                  num("eps", 0.0, "radius; 0 derives the median k-th neighbor distance"),
                  choice("ver", "fo", {"fo", "fan", "maxgap", "ratio", "participation", "kaiser", "brokenstick"},
                         "thresholding rule"),
                  num("alpha", 0.05, "fo: relative eigenvalue cutoff"),
                  num("fan_gap", 10.0, "fan: spectral-gap ratio cutoff"),
                  num("fan_cum", 0.95, "fan: cumulative variance fraction"),
                  num("gamma", 0.95, "ratio: cumulative variance fraction"),
                  num("kaiser_prop", 1.0, "kaiser: multiple of the mean eigenvalue (0.7 softens)"),
                  choice("agg", "mean", aggs, "aggregation of local estimates")}});
    r.push_back({"cdim",
                 "tangential",
                 "largest mutually obtuse set of neighbor directions",
                 {integer("k", 10, "neighbors"),
                  num("tol", 1e-12, "inner-product tolerance for obtuseness"),
                  integer("restarts", 32, "greedy restarts when k > 20"),
                  choice("agg", "mean", aggs, "aggregation of local estimates")}});
    r.push_back({"mle",
                 "parametric",
                 "Levina-Bickel maximum likelihood on neighbor distances",
                 {choice("nbhd", "knn", {"knn", "eps"}, "neighborhood form"),
                  integer("k", 10, "neighbors (also sets eps when eps=0)"),
                  num("eps", 0.0, "radius; 0 derives the median k-th neighbor distance"),
                  flag("corrected", false, "k-2 normalization (unbiased variant)"),
                  choice("agg", "mean", aggs, "aggregation of local estimates")}});
    r.push_back({"tle",
                 "parametric",
                 "tight locality estimator on skewed distances",
                 {integer("k", 10, "neighbors"),
                  num("epsilon", 1e-6, "skip pairs with skewed-distance ratio below this"),
                  choice("agg", "mean", aggs, "aggregation of local estimates")}});
    r.push_back({"twonn",
                 "parametric",
                 "two-nearest-neighbor ratio fit",
                 {num("discard_fraction", 0.05, "largest ratios dropped before the fit")}});
    r.push_back({"gride",
                 "parametric",
                 "generalized ratio maximum likelihood (r_n2 / r_n1)",
                 {integer("n1", 1, "inner neighbor order"),
                  integer("n2", 0, "outer order; 0 uses multiplier*n1"),
                  integer("multiplier", 2, "outer order multiplier"),
                  num("d_lo", 0.1, "search lower bound"),
                  num("d_hi", 0.0, "search upper bound; 0 means 3*D")}});
    r.push_back({"mind_ml",
                 "parametric",
                 "ML fit of the r_1/r_{k+1} density (continuous or integer)",
                 {integer("k", 1, "neighbors"),
                  choice("ver", "MLk", {"MLk", "MLi"}, "continuous root or integer argmax"),
                  integer("d_cap", 10, "root bracket / argmax range")}});
    r.push_back({"danco",
                 "parametric",
                 "ML ratios plus angle statistics against sphere calibration",
                 {integer("k", 10, "neighbors"),
                  integer("d_cap", 10, "calibration dimensions 1..d_cap"),
                  integer("calib_reps", 5, "calibration draws per dimension"),
                  integer("calib_seed", 0xDA2C0, "calibration seed (cache key)")}});
    r.push_back({"ess",
                 "parametric",
                 "expected simplex skewness around neighborhood centroids",
                 {integer("k", 10, "neighbors"),
                  integer("max_pairs", 2000, "pair budget per point before sampling"),
                  num("d_hi_factor", 3.0, "inversion grid reaches this multiple of D"),
                  choice("agg", "mean", aggs, "aggregation of local estimates")}});
    r.push_back({"corrint",
                 "parametric",
                 "correlation-integral slope between two scales",
                 {integer("k1", 2, "rank defining the inner scale"),
                  integer("k2", 12, "rank defining the outer scale"),
                  num("r1", 0.0, "explicit inner radius (overrides ranks)"),
                  num("r2", 0.0, "explicit outer radius (overrides ranks)")}});
    r.push_back({"packing",
                 "parametric",
                 "greedy packing-number slope between two scales",
                 {integer("k1", 2, "rank defining the inner scale"),
                  integer("k2", 12, "rank defining the outer scale"),
                  num("r1", 0.0, "explicit inner radius (overrides ranks)"),
                  num("r2", 0.0, "explicit outer radius (overrides ranks)")}});
    r.push_back({"doubling",
                 "parametric",
                 "knn-graph ball growth from radius 1 to 2",
                 {integer("k", 10, "graph degree"),
                  choice("agg", "mean", aggs, "aggregation of local estimates")}});
    r.push_back({"wodcap",
                 "parametric",
                 "cap-volume inversion of nearest-neighbor lens fractions",
                 {integer("k", 10, "neighbors"),
                  choice("agg", "mean", aggs, "aggregation of lens fractions"),
                  choice("lens", "metric", {"metric", "graph"}, "lens membership rule")}});
    r.push_back({"idea",
                 "parametric",
                 "mean neighbor-distance ratio with optional jackknife fit",
                 {integer("k", 10, "neighbors"),
                  flag("jackknife", false, "subsample extrapolation fit")}});
    r.push_back({"pettis",
                 "parametric",
                 "iterative regression of mean neighbor distances on k",
                 {integer("k_min", 1, "smallest k in the regression"),
                  integer("k_max", 10, "largest k in the regression")}});
    r.push_back({"ph0",
                 "graph",
                 "minimal-spanning-tree weight growth under subsampling",
                 {num("alpha", 0.5, "edge-weight power"),
                  num("f_min", 0.75, "smallest subsample fraction"),
                  num("f_max", 1.0, "largest subsample fraction"),
                  integer("steps", 10, "subsample sizes"),
                  integer("repeats", 10, "draws per size")}});
    r.push_back({"knn",
                 "graph",
                 "knn-graph length growth under subsampling",
                 {integer("k", 1, "graph degree"),
                  num("f_min", 0.75, "smallest subsample fraction"),
                  num("f_max", 1.0, "largest subsample fraction"),
                  integer("steps", 10, "subsample sizes"),
                  integer("repeats", 10, "draws per size")}});
    r.push_back({"magnitude",
                 "graph",
                 "slope of the magnitude function over its linear regime",
                 {integer("t_steps", 60, "grid points"),
                  num("t_lo", 0.05, "grid start as a multiple of 1/median nn distance"),
                  num("t_hi", 50.0, "grid end as a multiple of 1/median nn distance"),
                  num("curvature_threshold", 0.05, "|2nd difference| bound for the linear regime"),
                  integer("min_run", 5, "minimum linear-run length")}});
    return r;
}

const ParamSpec* find_param(const EstimatorInfo& info, const std::string& key) {
    for (const auto& p : info.params)
        if (p.name == key) return &p;
    return nullptr;
}

double as_number(const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        try {
            std::size_t pos = 0;
            double d = std::stod(v.get<std::string>(), &pos);
            if (pos == v.get<std::string>().size()) return d;
        } catch (...) {
        }
    }
    throw std::invalid_argument("parameter '" + key + "' expects a number");
}

int as_integer(const nlohmann::json& v, const std::string& key) {
    double d = as_number(v, key);
    double r = std::nearbyint(d);
    if (std::fabs(d - r) > 1e-9)
        throw std::invalid_argument("parameter '" + key + "' expects an integer");
    return static_cast<int>(r);
}

bool as_flag(const nlohmann::json& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
    }
    if (v.is_number()) return v.get<double>() != 0.0;
    throw std::invalid_argument("parameter '" + key + "' expects a boolean");
}

std::string as_choice(const nlohmann::json& v, const ParamSpec& spec) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    for (const auto& c : spec.choices)
        if (c == s) return s;
    std::string opts;
    for (const auto& c : spec.choices) opts += c + " ";
    throw std::invalid_argument("parameter '" + spec.name + "': '" + s + "' not one of: " + opts);
}

} // namespace

const std::vector<EstimatorInfo>& list_estimators() {
    static const std::vector<EstimatorInfo> reg = build_registry();
    return reg;
}

const EstimatorInfo& estimator_info(const std::string& id) {
    for (const auto& e : list_estimators())
        if (e.id == id) return e;
    std::string ids;
    for (const auto& e : list_estimators()) ids += e.id + " ";
    throw std::invalid_argument("unknown estimator '" + id + "'; known: " + ids);
}

nlohmann::json resolve_params(const std::string& id, const nlohmann::json& params) {
    const EstimatorInfo& info = estimator_info(id);
    if (!params.is_object() && !params.is_null())
        throw std::invalid_argument("estimator parameters must be a JSON object");
    nlohmann::json out = nlohmann::json::object();
    for (const auto& p : info.params) out[p.name] = p.def;
    if (params.is_object())
        for (auto it = params.begin(); it != params.end(); ++it) {
            const ParamSpec* spec = find_param(info, it.key());
            if (!spec)
                throw std::invalid_argument("estimator '" + id + "' has no parameter '" + it.key() +
                                            "'");
            switch (spec->kind) {
                case Kind::Number: out[it.key()] = as_number(it.value(), it.key()); break;
                case Kind::Integer: out[it.key()] = as_integer(it.value(), it.key()); break;
                case Kind::Flag: out[it.key()] = as_flag(it.value(), it.key()); break;
                case Kind::Choice: out[it.key()] = as_choice(it.value(), *spec); break;
            }
        }
    return out;
}

EstimateReport run_estimator(const std::string& id, const PointCloud& cloud,
                             const nlohmann::json& params, std::uint64_t seed) {
    nlohmann::json p = resolve_params(id, params);
    auto nbhd = [&]() {
        NbhdSpec n;
        n.mode = p["nbhd"] == "eps" ? NbhdSpec::Mode::Eps : NbhdSpec::Mode::Knn;
        n.k = p["k"].get<int>();
        n.eps = p["eps"].get<double>();
        return n;
    };

    if (id == "lpca") {
        LpcaOptions o;
        o.nbhd = nbhd();
        o.threshold.kind = threshold_from_string(p["ver"].get<std::string>());
        o.threshold.alpha = p["alpha"].get<double>();
        o.threshold.gap_threshold = p["fan_gap"].get<double>();
        o.threshold.cumulative_fraction = p["fan_cum"].get<double>();
        o.threshold.gamma = p["gamma"].get<double>();
        o.threshold.kaiser_prop = p["kaiser_prop"].get<double>();
        o.agg = agg_from_string(p["agg"].get<std::string>());
        return lpca_estimate(cloud, o);
    }
    if (id == "cdim") {
        CdimOptions o;
        o.k = p["k"].get<int>();
        o.tol = p["tol"].get<double>();
        o.restarts = p["restarts"].get<int>();
        o.agg = agg_from_string(p["agg"].get<std::string>());
        o.seed = seed;
        return conical_dimension(cloud, o);
    }
    if (id == "mle") {
        MleOptions o;
        o.nbhd = nbhd();
        o.corrected = p["corrected"].get<bool>();
        o.agg = agg_from_string(p["agg"].get<std::string>());
        return mle_estimate(cloud, o);
    }
    if (id == "tle") {
        TleOptions o;
        o.k = p["k"].get<int>();
        o.epsilon = p["epsilon"].get<double>();
        o.agg = agg_from_string(p["agg"].get<std::string>());
        return tle_estimate(cloud, o);
    }
    if (id == "twonn") {
        TwonnOptions o;
        o.discard_fraction = p["discard_fraction"].get<double>();
        return twonn_estimate(cloud, o);
    }
    if (id == "gride") {
        GrideOptions o;
        o.n1 = p["n1"].get<int>();
        o.n2 = p["n2"].get<int>();
        o.multiplier = p["multiplier"].get<int>();
        o.d_lo = p["d_lo"].get<double>();
        o.d_hi = p["d_hi"].get<double>();
        return gride_estimate(cloud, o);
    }
    if (id == "mind_ml") {
        MindOptions o;
        o.k = p["k"].get<int>();
        o.ver = p["ver"] == "MLi" ? MindOptions::Ver::MLi : MindOptions::Ver::MLk;
        o.d_cap = p["d_cap"].get<int>();
        return mind_estimate(cloud, o);
    }
    if (id == "danco") {
        DancoOptions o;
        o.k = p["k"].get<int>();
        o.d_cap = p["d_cap"].get<int>();
        o.calib_reps = p["calib_reps"].get<int>();
        o.calib_seed = static_cast<std::uint64_t>(p["calib_seed"].get<int>());
        return danco_estimate(cloud, o);
    }
    if (id == "ess") {
        EssOptions o;
        o.k = p["k"].get<int>();
        o.max_pairs = p["max_pairs"].get<int>();
        o.d_hi_factor = p["d_hi_factor"].get<double>();
        o.agg = agg_from_string(p["agg"].get<std::string>());
        o.seed = seed;
        return ess_estimate(cloud, o);
    }
    if (id == "corrint") {
        CorrIntOptions o;
        o.k1 = p["k1"].get<int>();
        o.k2 = p["k2"].get<int>();
        o.r1 = p["r1"].get<double>();
        o.r2 = p["r2"].get<double>();
        return corrint_estimate(cloud, o);
    }
    if (id == "packing") {
        PackingOptions o;
        o.k1 = p["k1"].get<int>();
        o.k2 = p["k2"].get<int>();
        o.r1 = p["r1"].get<double>();
        o.r2 = p["r2"].get<double>();
        return packing_estimate(cloud, o);
    }
    if (id == "doubling") {
        DoublingOptions o;
        o.k = p["k"].get<int>();
        o.agg = agg_from_string(p["agg"].get<std::string>());
        return doubling_estimate(cloud, o);
    }
    if (id == "wodcap") {
        WodcapOptions o;
        o.k = p["k"].get<int>();
        o.agg = agg_from_string(p["agg"].get<std::string>());
        o.graph_lens = p["lens"] == "graph";
        return wodcap_estimate(cloud, o);
    }
    if (id == "idea") {
        IdeaOptions o;
        o.k = p["k"].get<int>();
        o.jackknife = p["jackknife"].get<bool>();
        o.seed = seed;
        return idea_estimate(cloud, o);
    }
    if (id == "pettis") {
        PettisOptions o;
        o.k_min = p["k_min"].get<int>();
        o.k_max = p["k_max"].get<int>();
        return pettis_estimate(cloud, o);
    }
    if (id == "ph0") {
        Ph0Options o;
        o.alpha = p["alpha"].get<double>();
        o.schedule.f_min = p["f_min"].get<double>();
        o.schedule.f_max = p["f_max"].get<double>();
        o.schedule.steps = p["steps"].get<int>();
        o.schedule.repeats = p["repeats"].get<int>();
        o.schedule.seed = seed;
        return ph0_estimate(cloud, o);
    }
    if (id == "knn") {
        KnnFitOptions o;
        o.k = p["k"].get<int>();
        o.schedule.f_min = p["f_min"].get<double>();
        o.schedule.f_max = p["f_max"].get<double>();
        o.schedule.steps = p["steps"].get<int>();
        o.schedule.repeats = p["repeats"].get<int>();
        o.schedule.seed = seed;
        return knn_estimate(cloud, o);
    }
    if (id == "magnitude") {
        MagnitudeOptions o;
        o.t_steps = p["t_steps"].get<int>();
        o.t_lo_factor = p["t_lo"].get<double>();
        o.t_hi_factor = p["t_hi"].get<double>();
        o.curvature_threshold = p["curvature_threshold"].get<double>();
        o.min_run = p["min_run"].get<int>();
        return magnitude_dimension(cloud, o);
    }
    throw std::invalid_argument("unknown estimator '" + id + "'");
}

} // namespace dimest
