#include "dimest/harness.hpp"

#include "dimest/corruption.hpp"
#include "dimest/datasets.hpp"
#include "dimest/geometry.hpp"
#include "dimest/parallel.hpp"
#include "dimest/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace dimest {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t sub_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t z = Rng::mix(master + 0x9E3779B97F4A7C15ull * (a + 1));
    z = Rng::mix(z + 0x9E3779B97F4A7C15ull * (b + 1));
    return Rng::mix(z + 0x9E3779B97F4A7C15ull * (c + 1));
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// comma split that ignores commas inside parentheses, so Torus(2,1) survives
std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

// whitespace tokens, except inside {...}
std::vector<std::string> tokenize_braced(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : s) {
        if (std::isspace(static_cast<unsigned char>(ch)) && depth == 0) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            if (ch == '{') ++depth;
            if (ch == '}') --depth;
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

nlohmann::json parse_scalar(const std::string& t) {
    try {
        return nlohmann::json::parse(t); // numbers, true/false
    } catch (...) {
        return t; // plain string
    }
}

int parse_int(const std::string& t, const char* what) {
    try {
        std::size_t pos = 0;
        long v = std::stol(t, &pos);
        if (pos == t.size()) return static_cast<int>(v);
    } catch (...) {
    }
    throw std::invalid_argument(std::string(what) + ": expected an integer, got '" + t + "'");
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

template <class Cell>
void finalize_stats(Cell& c) {
    std::vector<double> ok;
    for (double v : c.values)
        if (std::isfinite(v)) ok.push_back(v);
    if (ok.empty()) {
        c.mean = c.median = c.stddev = kNaN;
        return;
    }
    c.mean = mean(ok);
    c.median = median(ok);
    c.stddev = ok.size() >= 2 ? sample_std(ok) : 0.0;
}

nlohmann::json values_to_json(const std::vector<double>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : v) {
        if (std::isfinite(x))
            a.push_back(x);
        else
            a.push_back(nullptr);
    }
    return a;
}

std::vector<double> values_from_json(const nlohmann::json& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(x.is_number() ? x.get<double>() : kNaN);
    return v;
}

} // namespace

// ---- config ----------------------------------------------------------------

std::vector<GridEntry> expand_grid(
    const std::string& estimator,
    const std::vector<std::pair<std::string, std::vector<nlohmann::json>>>& lists) {
    std::size_t total = 1;
    for (const auto& [key, vals] : lists) {
        if (vals.empty())
            throw std::invalid_argument("estimator '" + estimator + "': empty value list for '" +
                                        key + "'");
        total *= vals.size();
    }
    std::vector<std::size_t> stride(lists.size(), 1);
    for (std::size_t i = lists.size(); i-- > 1;) stride[i - 1] = stride[i] * lists[i].second.size();
    std::vector<GridEntry> out;
    out.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        GridEntry e{estimator, nlohmann::json::object()};
        for (std::size_t i = 0; i < lists.size(); ++i)
            e.params[lists[i].first] = lists[i].second[(idx / stride[i]) % lists[i].second.size()];
        resolve_params(estimator, e.params); // fail fast on bad keys or values
        out.push_back(std::move(e));
    }
    return out;
}

BenchConfig parse_bench_config(std::istream& in) {
    BenchConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string rest = trim(line.substr(eq + 1));
        if (key == "datasets") {
            for (const auto& t : split_list(rest)) cfg.datasets.push_back(t);
        } else if (key == "sizes") {
            cfg.sizes.clear();
            for (const auto& t : split_list(rest)) cfg.sizes.push_back(parse_int(t, "sizes"));
        } else if (key == "runs") {
            cfg.runs = parse_int(rest, "runs");
        } else if (key == "seed") {
            cfg.seed = std::stoull(rest);
        } else if (key == "estimator") {
            auto toks = tokenize_braced(rest);
            if (toks.empty())
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": estimator id missing");
            std::string id = toks[0];
            std::vector<std::pair<std::string, std::vector<nlohmann::json>>> lists;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                auto e = toks[i].find('=');
                if (e == std::string::npos)
                    throw std::invalid_argument("config line " + std::to_string(lineno) +
                                                ": expected key=value, got '" + toks[i] + "'");
                std::string k = toks[i].substr(0, e);
                std::string v = toks[i].substr(e + 1);
                std::vector<nlohmann::json> vals;
                if (v.size() >= 2 && v.front() == '{' && v.back() == '}') {
                    for (const auto& piece : split_list(v.substr(1, v.size() - 2)))
                        vals.push_back(parse_scalar(piece));
                } else {
                    vals.push_back(parse_scalar(v));
                }
                lists.emplace_back(k, std::move(vals));
            }
            auto entries = expand_grid(id, lists);
            cfg.grid.insert(cfg.grid.end(), entries.begin(), entries.end());
        } else {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

BenchConfig parse_bench_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse_bench_config(in);
}

// ---- bench -------------------------------------------------------------------

BenchResult bench_run(const BenchConfig& config) {
    if (config.runs < 1) throw std::invalid_argument("bench: runs must be >= 1");
    if (config.datasets.empty()) throw std::invalid_argument("bench: no datasets configured");
    if (config.sizes.empty()) throw std::invalid_argument("bench: no sizes configured");
    if (config.grid.empty()) throw std::invalid_argument("bench: no estimators configured");

    // validate names up front; bad dataset names are config errors, not run failures
    std::vector<double> true_dims;
    for (const auto& ds : config.datasets) {
        PointCloud probe = generate(ds, 2, 1);
        true_dims.push_back(probe.meta.true_dim ? double(*probe.meta.true_dim) : -1.0);
    }

    BenchResult res;
    res.config = config;
    const std::size_t D = config.datasets.size(), S = config.sizes.size(), G = config.grid.size();
    res.cells.reserve(D * S * G);
    for (std::size_t di = 0; di < D; ++di)
        for (std::size_t si = 0; si < S; ++si)
            for (std::size_t gi = 0; gi < G; ++gi) {
                BenchCell c;
                c.dataset = config.datasets[di];
                c.true_dim = true_dims[di];
                c.n = config.sizes[si];
                c.estimator = config.grid[gi].estimator;
                c.grid_index = static_cast<int>(gi);
                c.params = resolve_params(c.estimator, config.grid[gi].params);
                c.values.assign(config.runs, kNaN);
                res.cells.push_back(std::move(c));
            }

    for (std::size_t di = 0; di < D; ++di)
        for (std::size_t si = 0; si < S; ++si) {
            for (int run = 0; run < config.runs; ++run) {
                std::uint64_t cloud_seed = sub_seed(config.seed, di, si, run);
                PointCloud cloud = generate(config.datasets[di], config.sizes[si], cloud_seed);
                for (std::size_t gi = 0; gi < G; ++gi) {
                    BenchCell& cell = res.cells[(di * S + si) * G + gi];
                    try {
                        EstimateReport rep =
                            run_estimator(config.grid[gi].estimator, cloud,
                                          config.grid[gi].params, sub_seed(cloud_seed, gi, 7, 1));
                        cell.values[run] = rep.estimate;
                    } catch (const std::exception& e) {
                        cell.errors.push_back("run " + std::to_string(run) + ": " + e.what());
                    }
                }
            }
        }
    for (auto& c : res.cells) finalize_stats(c);
    return res;
}

void bench_to_csv(const BenchResult& r, std::ostream& out) {
    out << "dataset,true_dim,n,estimator,params,runs,failures,mean,median,std,values\n";
    for (const auto& c : r.cells) {
        out << csv_quote(c.dataset) << ',';
        if (c.true_dim >= 0) out << fmt17(c.true_dim);
        out << ',' << c.n << ',' << c.estimator << ',' << csv_quote(c.params.dump()) << ','
            << c.values.size() << ',' << c.errors.size() << ',' << fmt17(c.mean) << ','
            << fmt17(c.median) << ',' << fmt17(c.stddev) << ',';
        std::string joined;
        for (double v : c.values) {
            if (!joined.empty()) joined += ';';
            joined += fmt17(v);
        }
        out << csv_quote(joined) << '\n';
    }
}

namespace {

nlohmann::json grid_to_json(const std::vector<GridEntry>& g) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& e : g) a.push_back({{"estimator", e.estimator}, {"params", e.params}});
    return a;
}

std::vector<GridEntry> grid_from_json(const nlohmann::json& a) {
    std::vector<GridEntry> g;
    for (const auto& e : a) g.push_back({e.at("estimator").get<std::string>(), e.at("params")});
    return g;
}

} // namespace

nlohmann::json bench_to_json(const BenchResult& r) {
    nlohmann::json j;
    j["config"] = {{"datasets", r.config.datasets},
                   {"sizes", r.config.sizes},
                   {"runs", r.config.runs},
                   {"seed", r.config.seed},
                   {"grid", grid_to_json(r.config.grid)}};
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"dataset", c.dataset},
                         {"true_dim", c.true_dim},
                         {"n", c.n},
                         {"estimator", c.estimator},
                         {"grid_index", c.grid_index},
                         {"params", c.params},
                         {"values", values_to_json(c.values)},
                         {"errors", c.errors},
                         {"mean", std::isfinite(c.mean) ? nlohmann::json(c.mean) : nlohmann::json()},
                         {"median",
                          std::isfinite(c.median) ? nlohmann::json(c.median) : nlohmann::json()},
                         {"std",
                          std::isfinite(c.stddev) ? nlohmann::json(c.stddev) : nlohmann::json()}});
    }
    j["cells"] = std::move(cells);
    return j;
}

BenchResult bench_from_json(const nlohmann::json& j) {
    BenchResult r;
    const auto& cfg = j.at("config");
    r.config.datasets = cfg.at("datasets").get<std::vector<std::string>>();
    r.config.sizes = cfg.at("sizes").get<std::vector<int>>();
    r.config.runs = cfg.at("runs").get<int>();
    r.config.seed = cfg.at("seed").get<std::uint64_t>();
    r.config.grid = grid_from_json(cfg.at("grid"));
    for (const auto& cj : j.at("cells")) {
        BenchCell c;
        c.dataset = cj.at("dataset").get<std::string>();
        c.true_dim = cj.at("true_dim").get<double>();
        c.n = cj.at("n").get<int>();
        c.estimator = cj.at("estimator").get<std::string>();
        c.grid_index = cj.at("grid_index").get<int>();
        c.params = cj.at("params");
        c.values = values_from_json(cj.at("values"));
        c.errors = cj.at("errors").get<std::vector<std::string>>();
        c.mean = cj.at("mean").is_number() ? cj.at("mean").get<double>() : kNaN;
        c.median = cj.at("median").is_number() ? cj.at("median").get<double>() : kNaN;
        c.stddev = cj.at("std").is_number() ? cj.at("std").get<double>() : kNaN;
        r.cells.push_back(std::move(c));
    }
    return r;
}

// ---- selection ---------------------------------------------------------------

SelectionResult select_hyperparams(const BenchResult& r) {
    if (r.config.grid.empty()) throw std::invalid_argument("select: empty grid");

    // cell lookup: (grid_index, dataset, n) -> cell
    std::map<std::tuple<int, std::string, int>, const BenchCell*> lut;
    for (const auto& c : r.cells) lut[{c.grid_index, c.dataset, c.n}] = &c;

    auto cell_of = [&](int gi, const std::string& ds, int n) -> const BenchCell* {
        auto it = lut.find({gi, ds, n});
        return it == lut.end() ? nullptr : it->second;
    };
    auto err_of = [&](int gi, const std::string& ds, int n, double d, bool relative) {
        const BenchCell* c = cell_of(gi, ds, n);
        if (!c || !std::isfinite(c->mean)) return kInf;
        double e = std::fabs(c->mean - d);
        return relative ? e / d : e;
    };
    auto params_of = [&](int gi) {
        return resolve_params(r.config.grid[gi].estimator, r.config.grid[gi].params);
    };

    std::vector<std::string> est_order;
    for (const auto& ge : r.config.grid)
        if (std::find(est_order.begin(), est_order.end(), ge.estimator) == est_order.end())
            est_order.push_back(ge.estimator);

    SelectionResult out;
    for (const auto& est : est_order) {
        std::vector<int> gis;
        for (std::size_t gi = 0; gi < r.config.grid.size(); ++gi)
            if (r.config.grid[gi].estimator == est) gis.push_back(static_cast<int>(gi));

        for (int n : r.config.sizes) {
            SelectionRow row;
            row.estimator = est;
            row.n = n;

            // datasets with a known dimension, in config order
            std::vector<std::pair<std::string, double>> known;
            for (const auto& ds : r.config.datasets) {
                const BenchCell* c = cell_of(gis[0], ds, n);
                if (c && c->true_dim >= 0) known.emplace_back(ds, c->true_dim);
            }

            for (const auto& [ds, d] : known) {
                SelectionChoice best{gis[0], params_of(gis[0]), err_of(gis[0], ds, n, d, false)};
                for (std::size_t i = 1; i < gis.size(); ++i) {
                    double e = err_of(gis[i], ds, n, d, false);
                    if (e < best.score) best = {gis[i], params_of(gis[i]), e};
                }
                const BenchCell* c = cell_of(best.grid_index, ds, n);
                row.d_best[ds] = c ? c->mean : kNaN;
                row.best[ds] = std::move(best);
            }

            auto pick_median = [&](bool relative) {
                SelectionChoice choice{gis[0], params_of(gis[0]), kInf};
                bool first = true;
                for (int gi : gis) {
                    std::vector<double> errs;
                    for (const auto& [ds, d] : known) errs.push_back(err_of(gi, ds, n, d, relative));
                    double score = errs.empty() ? kInf : median(errs);
                    if (first || score < choice.score) {
                        choice = {gi, params_of(gi), score};
                        first = false;
                    }
                }
                return choice;
            };
            row.med_abs = pick_median(false);
            row.med_rel = pick_median(true);
            for (const auto& [ds, d] : known) {
                const BenchCell* ca = cell_of(row.med_abs.grid_index, ds, n);
                const BenchCell* cr = cell_of(row.med_rel.grid_index, ds, n);
                row.d_abs[ds] = ca ? ca->mean : kNaN;
                row.d_rel[ds] = cr ? cr->mean : kNaN;
            }
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

void selection_to_csv(const SelectionResult& s, std::ostream& out) {
    out << "estimator,n,dataset,d_best,best_params,d_abs,abs_params,d_rel,rel_params\n";
    for (const auto& row : s.rows)
        for (const auto& [ds, v] : row.d_best) {
            out << row.estimator << ',' << row.n << ',' << csv_quote(ds) << ',' << fmt17(v) << ','
                << csv_quote(row.best.at(ds).params.dump()) << ',' << fmt17(row.d_abs.at(ds))
                << ',' << csv_quote(row.med_abs.params.dump()) << ',' << fmt17(row.d_rel.at(ds))
                << ',' << csv_quote(row.med_rel.params.dump()) << '\n';
        }
}

namespace {

nlohmann::json choice_to_json(const SelectionChoice& c) {
    return {{"grid_index", c.grid_index},
            {"params", c.params},
            {"score", std::isfinite(c.score) ? nlohmann::json(c.score) : nlohmann::json()}};
}

} // namespace

nlohmann::json selection_to_json(const SelectionResult& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : s.rows) {
        nlohmann::json best = nlohmann::json::object();
        for (const auto& [ds, c] : row.best) best[ds] = choice_to_json(c);
        auto vmap = [](const std::map<std::string, double>& m) {
            nlohmann::json j = nlohmann::json::object();
            for (const auto& [k, v] : m) j[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
            return j;
        };
        rows.push_back({{"estimator", row.estimator},
                        {"n", row.n},
                        {"med_abs", choice_to_json(row.med_abs)},
                        {"med_rel", choice_to_json(row.med_rel)},
                        {"best", std::move(best)},
                        {"d_best", vmap(row.d_best)},
                        {"d_abs", vmap(row.d_abs)},
                        {"d_rel", vmap(row.d_rel)}});
    }
    return {{"rows", std::move(rows)}};
}

// ---- noise -------------------------------------------------------------------

namespace {

struct NoiseDataset {
    const char* label;
    int true_dim;
    PointCloud (*make)(int, std::uint64_t);
};

const NoiseDataset kNoiseDatasets[] = {
    {"S6_R11", 6,
     [](int n, std::uint64_t s) { return zero_pad(generate("Sphere(6)", n, s), 11); }},
    {"S10_R11", 10, [](int n, std::uint64_t s) { return generate("M1_Sphere", n, s); }},
    {"SO4_R16", 6, [](int n, std::uint64_t s) { return generate("SOn(4)", n, s); }},
};

} // namespace

NoiseResult noise_experiment(const NoiseConfig& config) {
    if (config.grid.empty()) throw std::invalid_argument("noise: no estimators configured");
    if (config.runs < 1) throw std::invalid_argument("noise: runs must be >= 1");

    // one hyperparameter setting per estimator, from the clean 10-sphere
    BenchConfig bc;
    bc.datasets = {"M1_Sphere"};
    bc.sizes = {config.n};
    bc.runs = config.runs;
    bc.seed = sub_seed(config.seed, 0xA11, 0, 0);
    bc.grid = config.grid;
    SelectionResult sel = select_hyperparams(bench_run(bc));

    NoiseResult res;
    res.config = config;
    std::vector<std::string> est_order;
    for (const auto& row : sel.rows) {
        res.chosen[row.estimator] = row.best.at("M1_Sphere");
        est_order.push_back(row.estimator);
    }

    struct Sweep {
        const char* kind;
        std::vector<double> levels;
    };
    std::vector<Sweep> sweeps;
    sweeps.push_back({"gaussian", config.gaussian_sds});
    {
        std::vector<double> lv(config.outlier_counts.begin(), config.outlier_counts.end());
        sweeps.push_back({"outliers", lv});
    }

    const std::size_t E = est_order.size();
    const std::size_t ND = std::size(kNoiseDatasets);
    std::vector<std::size_t> level_base(sweeps.size() + 1, 0);
    for (std::size_t ki = 0; ki < sweeps.size(); ++ki)
        level_base[ki + 1] = level_base[ki] + sweeps[ki].levels.size();
    const std::size_t L = level_base.back();

    res.cells.resize(ND * L * E);
    for (std::size_t di = 0; di < ND; ++di)
        for (std::size_t ki = 0; ki < sweeps.size(); ++ki)
            for (std::size_t li = 0; li < sweeps[ki].levels.size(); ++li)
                for (std::size_t ei = 0; ei < E; ++ei) {
                    NoiseCell& c = res.cells[(di * L + level_base[ki] + li) * E + ei];
                    c.dataset = kNoiseDatasets[di].label;
                    c.true_dim = kNoiseDatasets[di].true_dim;
                    c.kind = sweeps[ki].kind;
                    c.level = sweeps[ki].levels[li];
                    c.estimator = est_order[ei];
                    c.params = res.chosen.at(est_order[ei]).params;
                    c.values.assign(config.runs, kNaN);
                }

    for (std::size_t di = 0; di < ND; ++di) {
        for (int run = 0; run < config.runs; ++run) {
            std::uint64_t cloud_seed = sub_seed(config.seed, 0xD0 + di, run, 0);
            PointCloud clean = kNoiseDatasets[di].make(config.n, cloud_seed);

            auto evaluate = [&](std::size_t ei, const PointCloud& c) {
                std::pair<double, std::string> out{kNaN, ""};
                try {
                    out.first =
                        run_estimator(est_order[ei], c, res.chosen.at(est_order[ei]).params,
                                      sub_seed(cloud_seed, ei, 3, 9))
                            .estimate;
                } catch (const std::exception& e) {
                    out.second = "run " + std::to_string(run) + ": " + e.what();
                }
                return out;
            };
            // level-0 cells in both sweeps share one evaluation of the clean cloud
            std::vector<std::pair<double, std::string>> clean_eval(E, {kNaN, ""});
            std::vector<bool> clean_done(E, false);

            for (std::size_t ki = 0; ki < sweeps.size(); ++ki)
                for (std::size_t li = 0; li < sweeps[ki].levels.size(); ++li) {
                    double level = sweeps[ki].levels[li];
                    const PointCloud* cur = &clean;
                    PointCloud corrupted;
                    if (level > 0) {
                        std::uint64_t cs = sub_seed(cloud_seed, 0xC0 + ki, li, 0);
                        // gaussian levels are standard deviations; the sampler wants a variance
                        corrupted = ki == 0 ? add_gaussian_noise(clean, level * level, cs)
                                            : add_outliers(clean, static_cast<int>(level), cs);
                        cur = &corrupted;
                    }
                    for (std::size_t ei = 0; ei < E; ++ei) {
                        NoiseCell& cell = res.cells[(di * L + level_base[ki] + li) * E + ei];
                        std::pair<double, std::string> ev;
                        if (level <= 0) {
                            if (!clean_done[ei]) {
                                clean_eval[ei] = evaluate(ei, clean);
                                clean_done[ei] = true;
                            }
                            ev = clean_eval[ei];
                        } else {
                            ev = evaluate(ei, *cur);
                        }
                        cell.values[run] = ev.first;
                        if (!ev.second.empty()) cell.errors.push_back(ev.second);
                    }
                }
        }
    }
    for (auto& c : res.cells) finalize_stats(c);
    return res;
}

void noise_to_csv(const NoiseResult& r, std::ostream& out) {
    out << "dataset,true_dim,kind,level,estimator,params,runs,failures,mean,median,std,values\n";
    for (const auto& c : r.cells) {
        out << c.dataset << ',' << fmt17(c.true_dim) << ',' << c.kind << ',' << fmt17(c.level)
            << ',' << c.estimator << ',' << csv_quote(c.params.dump()) << ',' << c.values.size()
            << ',' << c.errors.size() << ',' << fmt17(c.mean) << ',' << fmt17(c.median) << ','
            << fmt17(c.stddev) << ',';
        std::string joined;
        for (double v : c.values) {
            if (!joined.empty()) joined += ';';
            joined += fmt17(v);
        }
        out << csv_quote(joined) << '\n';
    }
}

nlohmann::json noise_to_json(const NoiseResult& r) {
    nlohmann::json chosen = nlohmann::json::object();
    for (const auto& [est, c] : r.chosen) chosen[est] = choice_to_json(c);
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
        cells.push_back({{"dataset", c.dataset},
                         {"true_dim", c.true_dim},
                         {"kind", c.kind},
                         {"level", c.level},
                         {"estimator", c.estimator},
                         {"params", c.params},
                         {"values", values_to_json(c.values)},
                         {"errors", c.errors},
                         {"mean", std::isfinite(c.mean) ? nlohmann::json(c.mean) : nlohmann::json()},
                         {"median",
                          std::isfinite(c.median) ? nlohmann::json(c.median) : nlohmann::json()},
                         {"std",
                          std::isfinite(c.stddev) ? nlohmann::json(c.stddev) : nlohmann::json()}});
    }
    return {{"n", r.config.n},
            {"runs", r.config.runs},
            {"seed", r.config.seed},
            {"chosen", std::move(chosen)},
            {"cells", std::move(cells)}};
}

// ---- paraboloid pointwise ------------------------------------------------------

namespace {

// neighbors of `query` sorted by (squared distance, index), nearest first
std::vector<std::pair<double, int>> sorted_neighbors(const Matrix& X, int query, int k_max) {
    std::vector<std::pair<double, int>> cand;
    cand.reserve(X.rows() - 1);
    for (int i = 0; i < X.rows(); ++i) {
        if (i == query) continue;
        cand.emplace_back((X.row(i) - X.row(query)).squaredNorm(), i);
    }
    if (k_max < static_cast<int>(cand.size()))
        std::nth_element(cand.begin(), cand.begin() + k_max, cand.end());
    cand.resize(std::min<std::size_t>(k_max, cand.size()));
    std::sort(cand.begin(), cand.end());
    return cand;
}

// FO rule on the covariance spectrum of {query} + first k neighbors; matches
// the full estimator's convention (centered, 1/(m-1))
int lpca_fo_prefix(const Matrix& X, int query, const std::vector<std::pair<double, int>>& nb,
                   int k, double alpha) {
    Eigen::Vector3d s1 = X.row(query).transpose();
    Eigen::Matrix3d s2 = s1 * s1.transpose();
    for (int j = 0; j < k; ++j) {
        Eigen::Vector3d v = X.row(nb[j].second).transpose();
        s1 += v;
        s2 += v * v.transpose();
    }
    const double m = k + 1.0;
    Eigen::Matrix3d cov = (s2 - s1 * s1.transpose() / m) / (m - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    Eigen::Vector3d l = es.eigenvalues().reverse().cwiseMax(0.0);
    if (l(0) <= 0.0) return 0;
    int u = 0;
    for (int i = 0; i < 3; ++i)
        if (l(i) > alpha * l(0)) u = i + 1;
    return u;
}

} // namespace

ParaboloidResult paraboloid_pointwise(const ParaboloidConfig& config) {
    if (config.b_grid.empty()) throw std::invalid_argument("paraboloid: empty b grid");
    if (config.k_min < 2 || config.k_step < 1 || config.k_max < config.k_min)
        throw std::invalid_argument("paraboloid: need 2 <= k_min <= k_max, k_step >= 1");
    const bool lpca = config.estimator == "lpca";
    if (!lpca && config.estimator != "mle")
        throw std::invalid_argument("paraboloid: estimator must be lpca or mle");
    const int reps = config.reps > 0 ? config.reps : (lpca ? 1500 : 150);

    std::vector<int> klist;
    for (int k = config.k_min; k <= config.k_max; k += config.k_step) klist.push_back(k);
    const int K = static_cast<int>(klist.size());

    ParaboloidResult res;
    res.config = config;
    for (std::size_t bi = 0; bi < config.b_grid.size(); ++bi) {
        const double b = config.b_grid[bi];
        long n = std::lround(paraboloid_auto_count(b) * (config.base_count / 10000.0));
        n = std::max<long>(n, config.k_max + 2);

        std::ostringstream name;
        name.precision(17);
        name << "Paraboloid(" << b << ',' << (config.negative ? '-' : '+') << ")";
        const std::string spec = name.str();

        std::vector<double> vals(static_cast<std::size_t>(reps) * K, kNaN);
        parallel_for(reps, [&](std::size_t rep) {
            PointCloud cloud =
                generate(spec, static_cast<int>(n), sub_seed(config.seed, bi + 1, rep, 0x9A));
            const Matrix& X = cloud.points;
            int query = 0;
            double best = X.row(0).squaredNorm();
            for (int i = 1; i < X.rows(); ++i) {
                double s = X.row(i).squaredNorm();
                if (s < best) {
                    best = s;
                    query = i;
                }
            }
            auto nb = sorted_neighbors(X, query, config.k_max);
            if (lpca) {
                for (int ki = 0; ki < K; ++ki)
                    vals[rep * K + ki] = lpca_fo_prefix(X, query, nb, klist[ki], config.alpha);
            } else {
                std::vector<double> d(nb.size());
                bool zero = false;
                for (std::size_t j = 0; j < nb.size(); ++j) {
                    d[j] = std::sqrt(nb[j].first);
                    if (d[j] <= 0.0) zero = true;
                }
                if (zero) return; // coincident samples; leave the row NaN
                double logsum = 0.0; // sum of log d_j over j < k-1
                int ki = 0;
                for (int k = 1; k <= config.k_max && ki < K; ++k) {
                    if (k == klist[ki]) {
                        double s = (k - 1) * std::log(d[k - 1]) - logsum;
                        if (s > 0)
                            vals[rep * K + ki] = (config.corrected ? k - 2.0 : k - 1.0) / s;
                        ++ki;
                    }
                    logsum += std::log(d[k - 1]);
                }
            }
        });

        const double kappa2 = (config.negative ? -1.0 : 1.0) * 2.0 / (b * b);
        for (int ki = 0; ki < K; ++ki) {
            std::vector<double> col;
            for (int rep = 0; rep < reps; ++rep) {
                double v = vals[static_cast<std::size_t>(rep) * K + ki];
                if (!std::isfinite(v)) continue;
                col.push_back(lpca ? double(std::lround(v) == 2) : v);
            }
            ParaboloidRow row;
            row.b = b;
            row.kappa2 = kappa2;
            row.k = klist[ki];
            row.mean = col.empty() ? kNaN : mean(col);
            row.stddev = col.size() >= 2 ? sample_std(col) : 0.0;
            res.rows.push_back(row);
        }
        if (lpca) {
            std::vector<double> counts, largests;
            for (int rep = 0; rep < reps; ++rep) {
                double cnt = 0, lg = 0;
                for (int ki = 0; ki < K; ++ki) {
                    double v = vals[static_cast<std::size_t>(rep) * K + ki];
                    if (std::isfinite(v) && std::lround(v) == 2) {
                        cnt += 1;
                        lg = klist[ki];
                    }
                }
                counts.push_back(cnt);
                largests.push_back(lg);
            }
            ParaboloidSummary s;
            s.b = b;
            s.kappa2 = kappa2;
            s.n = static_cast<int>(n);
            s.mean_count = mean(counts);
            s.sd_count = counts.size() >= 2 ? sample_std(counts) : 0.0;
            s.mean_largest = mean(largests);
            s.sd_largest = largests.size() >= 2 ? sample_std(largests) : 0.0;
            res.summary.push_back(s);
        }
    }
    return res;
}

void paraboloid_to_csv(const ParaboloidResult& r, std::ostream& out) {
    out << "b,kappa2,k,mean,std\n";
    for (const auto& row : r.rows)
        out << fmt17(row.b) << ',' << fmt17(row.kappa2) << ',' << row.k << ',' << fmt17(row.mean)
            << ',' << fmt17(row.stddev) << '\n';
    if (!r.summary.empty()) {
        out << "\nb,kappa2,n,mean_count2,sd_count2,mean_largest_k2,sd_largest_k2\n";
        for (const auto& s : r.summary)
            out << fmt17(s.b) << ',' << fmt17(s.kappa2) << ',' << s.n << ',' << fmt17(s.mean_count)
                << ',' << fmt17(s.sd_count) << ',' << fmt17(s.mean_largest) << ','
                << fmt17(s.sd_largest) << '\n';
    }
}

// ---- torus CDF -----------------------------------------------------------------

double torus_angle_area_cdf(double t, double R, double r) {
    t = std::clamp(t, 0.0, M_PI);
    return (R * t - r * std::sin(t)) / (M_PI * R);
}

double ks_statistic_sorted(const std::vector<double>& sorted_sample,
                           const std::vector<double>& cdf_at_sample) {
    const std::size_t m = sorted_sample.size();
    if (m != cdf_at_sample.size()) throw std::invalid_argument("ks: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        d = std::max(d, (i + 1.0) / m - cdf_at_sample[i]);
        d = std::max(d, cdf_at_sample[i] - double(i) / m);
    }
    return d;
}

double ks_asymptotic_p(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double p = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
        p += (j % 2 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

TorusCdfResult torus_overestimate_cdf(const TorusCdfConfig& config) {
    if (!(config.R > config.r && config.r > 0))
        throw std::invalid_argument("torus: need R > r > 0");
    if (config.n < 16) throw std::invalid_argument("torus: too few points");

    std::ostringstream name;
    name.precision(17);
    name << "Torus(" << config.R << ',' << config.r << ")";
    PointCloud cloud = generate(name.str(), config.n, sub_seed(config.seed, 0x70B, 0, 0));

    EstimateReport rep = run_estimator(config.estimator, cloud, config.params,
                                       sub_seed(config.seed, 0x70B, 1, 0));
    if (!rep.locals)
        throw std::runtime_error("torus: estimator '" + config.estimator +
                                 "' reports no pointwise estimates");
    if (static_cast<int>(rep.locals->size()) != config.n)
        throw std::runtime_error("torus: pointwise estimates do not cover every sample; "
                                 "use a knn neighborhood");

    TorusCdfResult res;
    res.config = config;
    res.points.reserve(config.n);
    for (int i = 0; i < config.n; ++i) {
        double phi = torus_tube_angle(cloud.points(i, 0), cloud.points(i, 1), cloud.points(i, 2),
                                      config.R, config.r);
        double l = (*rep.locals)[i];
        TorusPointRow row;
        row.phi = phi;
        row.t = std::fabs(phi - M_PI);
        row.over = std::isfinite(l) && std::lround(l) == 3 ? 1 : 0;
        res.points.push_back(row);
    }
    std::sort(res.points.begin(), res.points.end(),
              [](const TorusPointRow& a, const TorusPointRow& b) {
                  return a.t != b.t ? a.t < b.t : a.phi < b.phi;
              });

    std::vector<double> t_over, cdf_over;
    for (const auto& p : res.points)
        if (p.over) {
            t_over.push_back(p.t);
            cdf_over.push_back(torus_angle_area_cdf(p.t, config.R, config.r));
        }
    res.n_over = static_cast<int>(t_over.size());
    if (res.n_over > 0) {
        res.ks_stat = ks_statistic_sorted(t_over, cdf_over);
        double m = res.n_over;
        res.ks_p = ks_asymptotic_p((std::sqrt(m) + 0.12 + 0.11 / std::sqrt(m)) * res.ks_stat);
    } else {
        res.ks_stat = 0.0;
        res.ks_p = 1.0;
    }
    return res;
}

void torus_to_csv(const TorusCdfResult& r, std::ostream& out) {
    out << "phi,t,over,cum_over,cdf_emp,cdf_area\n";
    int cum = 0;
    for (const auto& p : r.points) {
        cum += p.over;
        double emp = r.n_over > 0 ? double(cum) / r.n_over : 0.0;
        out << fmt17(p.phi) << ',' << fmt17(p.t) << ',' << p.over << ',' << cum << ',' << fmt17(emp)
            << ',' << fmt17(torus_angle_area_cdf(p.t, r.config.R, r.config.r)) << '\n';
    }
}

} // namespace dimest
