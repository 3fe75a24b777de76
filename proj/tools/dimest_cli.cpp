#include "dimest/corruption.hpp"
#include "dimest/csv.hpp"
#include "dimest/datasets.hpp"
#include "dimest/harness.hpp"
#include "dimest/parallel.hpp"
#include "dimest/registry.hpp"
#include "dimest/report.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using dimest::BenchConfig;
using nlohmann::json;

namespace {

json parse_value(const std::string& t) {
    try {
        return json::parse(t);
    } catch (...) {
        return t;
    }
}

// --set k=20 --set agg=hmean
void apply_sets(json& params, const std::vector<std::string>& sets) {
    for (const auto& s : sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--set", "expected key=value, got '" + s + "'");
        params[s.substr(0, eq)] = parse_value(s.substr(eq + 1));
    }
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
}

int finish_table(std::size_t failures, bool allow_failures) {
    if (failures == 0) return 0;
    std::cerr << failures << " run(s) failed" << (allow_failures ? " (allowed)" : "") << "\n";
    return allow_failures ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"intrinsic dimension estimation toolkit"};
    app.require_subcommand(1);

    int jobs = 0;
    app.add_option("--jobs,--threads", jobs, "worker threads (0 keeps the library default)");

    // generate ---------------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "sample a benchmark dataset to CSV");
    std::string g_name, g_out;
    int g_n = 1000, g_pad = 0;
    std::uint64_t g_seed = 0;
    gen->add_option("--name", g_name, "dataset name, e.g. M1_Sphere or Torus(2,1)")->required();
    gen->add_option("--n", g_n, "sample count");
    gen->add_option("--seed", g_seed, "generator seed");
    gen->add_option("--pad", g_pad, "zero-pad the ambient dimension up to this");
    gen->add_option("--out", g_out, "output CSV path")->required();

    // corrupt ----------------------------------------------------------------
    auto* cor = app.add_subcommand("corrupt", "add Gaussian noise or outliers to a CSV cloud");
    std::string c_in, c_out;
    double c_var = 0.0;
    int c_outliers = 0;
    std::uint64_t c_seed = 0;
    cor->add_option("--in", c_in, "input CSV")->required();
    cor->add_option("--out", c_out, "output CSV")->required();
    auto* c_var_opt = cor->add_option("--gaussian", c_var, "noise variance per coordinate");
    auto* c_out_opt = cor->add_option("--outliers", c_outliers, "number of points to blow up");
    cor->add_option("--seed", c_seed, "corruption seed");

    // estimate ---------------------------------------------------------------
    auto* est = app.add_subcommand("estimate", "run one estimator on a CSV cloud");
    std::string e_id, e_in;
    std::uint64_t e_seed = 0;
    bool e_json = false;
    est->add_option("--id", e_id, "estimator id (see `list`)")->required();
    est->add_option("--in", e_in, "input CSV")->required();
    est->add_option("--seed", e_seed, "seed for randomized internals");
    est->add_flag("--json", e_json, "print the full report as JSON");
    // common hyperparameters as first-class flags; anything else via --set
    int e_k = 0, e_n1 = 0, e_n2 = 0, e_k1 = 0, e_k2 = 0;
    double e_eps = 0, e_alpha = 0, e_discard = 0;
    std::string e_ver, e_agg, e_nbhd;
    bool e_corrected = false;
    auto* o_k = est->add_option("--k", e_k, "neighbor count");
    auto* o_eps = est->add_option("--eps", e_eps, "ball radius");
    auto* o_nbhd = est->add_option("--nbhd", e_nbhd, "neighborhood form: knn or eps");
    auto* o_alpha = est->add_option("--alpha", e_alpha, "threshold / weight exponent");
    auto* o_ver = est->add_option("--ver", e_ver, "estimator variant");
    auto* o_agg = est->add_option("--agg", e_agg, "aggregation: mean, hmean, median");
    auto* o_n1 = est->add_option("--n1", e_n1, "inner neighbor order");
    auto* o_n2 = est->add_option("--n2", e_n2, "outer neighbor order");
    auto* o_disc = est->add_option("--discard-fraction", e_discard, "ratio trim fraction");
    auto* o_k1 = est->add_option("--k1", e_k1, "inner scale rank");
    auto* o_k2 = est->add_option("--k2", e_k2, "outer scale rank");
    auto* o_corr = est->add_flag("--corrected", e_corrected, "bias-corrected variant");
    std::vector<std::string> e_sets;
    est->add_option("--set", e_sets, "extra hyperparameter key=value (repeatable)");

    // list -------------------------------------------------------------------
    auto* lst = app.add_subcommand("list", "list estimators (or datasets) and their options");
    bool l_datasets = false;
    lst->add_flag("--datasets", l_datasets, "list the benchmark datasets instead");

    // bench ------------------------------------------------------------------
    auto* ben = app.add_subcommand("bench", "run a benchmark sweep from a config file");
    std::string b_config, b_outdir = ".";
    std::uint64_t b_seed = 0;
    bool b_allow = false;
    ben->add_option("--config", b_config, "sweep config file")->required();
    ben->add_option("--out-dir", b_outdir, "output directory");
    auto* b_seed_opt = ben->add_option("--seed", b_seed, "override the config seed");
    ben->add_flag("--allow-failures", b_allow, "exit 0 even when runs failed");

    // select -----------------------------------------------------------------
    auto* sel = app.add_subcommand("select", "hyperparameter selection from a sweep");
    std::string s_config, s_from, s_outdir = ".";
    std::uint64_t s_seed = 0;
    bool s_allow = false;
    auto* s_cfg_opt = sel->add_option("--config", s_config, "run the sweep, then select");
    auto* s_from_opt = sel->add_option("--from", s_from, "selection from an existing bench.json");
    sel->add_option("--out-dir", s_outdir, "output directory");
    auto* s_seed_opt = sel->add_option("--seed", s_seed, "override the config seed");
    sel->add_flag("--allow-failures", s_allow, "exit 0 even when runs failed");

    // noise ------------------------------------------------------------------
    auto* noi = app.add_subcommand("noise", "corruption sweep with tuned hyperparameters");
    std::string n_config, n_outdir = ".";
    int n_n = 2500, n_runs = 0;
    std::uint64_t n_seed = 0;
    bool n_allow = false;
    noi->add_option("--config", n_config, "config file; its estimator lines form the grids")
        ->required();
    noi->add_option("--n", n_n, "sample count per cloud");
    auto* n_runs_opt = noi->add_option("--runs", n_runs, "repetitions per cell");
    auto* n_seed_opt = noi->add_option("--seed", n_seed, "override the config seed");
    noi->add_option("--out-dir", n_outdir, "output directory");
    noi->add_flag("--allow-failures", n_allow, "exit 0 even when runs failed");

    // curvature --------------------------------------------------------------
    auto* cur = app.add_subcommand("curvature", "pointwise curvature-response experiments");
    std::string u_kind, u_est, u_outdir = ".";
    std::vector<double> u_b;
    bool u_negative = false, u_corrected = false;
    double u_alpha = 0.05, u_R = 2.0, u_r = 1.0;
    int u_kmin = 20, u_kmax = 165, u_kstep = 5, u_reps = 0, u_base = 10000, u_n = 10000;
    std::uint64_t u_seed = 0;
    std::vector<std::string> u_sets;
    cur->add_option("--kind", u_kind, "paraboloid or torus")->required();
    cur->add_option("--estimator", u_est, "pointwise estimator (default lpca)");
    cur->add_option("--b", u_b, "paraboloid b values");
    cur->add_flag("--negative", u_negative, "hyperbolic family z = 2x^2 - y^2/b^2");
    cur->add_option("--alpha", u_alpha, "lpca FO threshold");
    cur->add_flag("--corrected", u_corrected, "bias-corrected mle locals");
    cur->add_option("--k-min", u_kmin, "smallest k");
    cur->add_option("--k-max", u_kmax, "largest k");
    cur->add_option("--k-step", u_kstep, "k stride");
    cur->add_option("--reps", u_reps, "repetitions (0 keeps the defaults)");
    cur->add_option("--base-count", u_base, "samples at b=1");
    cur->add_option("--torus-R", u_R, "torus major radius");
    cur->add_option("--torus-r", u_r, "torus minor radius");
    cur->add_option("--n", u_n, "torus sample count");
    cur->add_option("--set", u_sets, "torus estimator hyperparameter key=value (repeatable)");
    cur->add_option("--seed", u_seed, "experiment seed");
    cur->add_option("--out-dir", u_outdir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (jobs > 0) dimest::set_threads(jobs);

        if (*gen) {
            dimest::PointCloud cloud = dimest::generate(g_name, g_n, g_seed);
            if (g_pad > 0) cloud = dimest::zero_pad(cloud, g_pad);
            dimest::save_csv(g_out, cloud.points);
            std::cout << g_name << ": " << cloud.n() << " x " << cloud.dim();
            if (cloud.meta.true_dim) std::cout << " (d = " << *cloud.meta.true_dim << ")";
            std::cout << " -> " << g_out << "\n";
        } else if (*cor) {
            if (c_var_opt->count() + c_out_opt->count() != 1)
                throw CLI::ValidationError("corrupt", "pass exactly one of --gaussian, --outliers");
            dimest::PointCloud cloud{dimest::load_csv(c_in), {}};
            cloud = c_var_opt->count() ? dimest::add_gaussian_noise(cloud, c_var, c_seed)
                                       : dimest::add_outliers(cloud, c_outliers, c_seed);
            dimest::save_csv(c_out, cloud.points);
        } else if (*est) {
            json params = json::object();
            if (o_k->count()) params["k"] = e_k;
            if (o_eps->count()) params["eps"] = e_eps;
            if (o_nbhd->count()) params["nbhd"] = e_nbhd;
            if (o_alpha->count()) params["alpha"] = e_alpha;
            if (o_ver->count()) params["ver"] = e_ver;
            if (o_agg->count()) params["agg"] = e_agg;
            if (o_n1->count()) params["n1"] = e_n1;
            if (o_n2->count()) params["n2"] = e_n2;
            if (o_disc->count()) params["discard_fraction"] = e_discard;
            if (o_k1->count()) params["k1"] = e_k1;
            if (o_k2->count()) params["k2"] = e_k2;
            if (o_corr->count()) params["corrected"] = e_corrected;
            apply_sets(params, e_sets);
            dimest::PointCloud cloud{dimest::load_csv(e_in), {}};
            dimest::EstimateReport rep = dimest::run_estimator(e_id, cloud, params, e_seed);
            if (e_json) {
                std::cout << dimest::report_to_json(rep).dump(2) << "\n";
            } else {
                std::cout << rep.estimate << "\n";
                for (const auto& f : rep.flags) std::cerr << "flag: " << f << "\n";
            }
        } else if (*lst) {
            if (l_datasets) {
                for (const auto& e : dimest::dataset_catalog())
                    std::cout << e.name << "  d=" << e.d << " D=" << e.D << "  " << e.desc << "\n";
                std::cout << "parametric: Sphere(d) SOn(n) Torus(R,r) Paraboloid(b,+|-)\n";
            } else {
                for (const auto& e : dimest::list_estimators()) {
                    std::cout << e.id << " [" << e.family << "] " << e.summary << "\n";
                    for (const auto& p : e.params) {
                        std::cout << "    " << p.name << " = " << p.def.dump();
                        if (!p.choices.empty()) {
                            std::cout << " (";
                            for (std::size_t i = 0; i < p.choices.size(); ++i)
                                std::cout << (i ? "|" : "") << p.choices[i];
                            std::cout << ")";
                        }
                        std::cout << "  " << p.help << "\n";
                    }
                }
            }
        } else if (*ben) {
            BenchConfig cfg = dimest::parse_bench_config_file(b_config);
            if (b_seed_opt->count()) cfg.seed = b_seed;
            dimest::BenchResult result = dimest::bench_run(cfg);
            auto csv = open_out(b_outdir, "bench.csv");
            dimest::bench_to_csv(result, csv);
            auto js = open_out(b_outdir, "bench.json");
            js << dimest::bench_to_json(result).dump(2) << "\n";
            std::size_t failures = 0;
            for (const auto& c : result.cells) failures += c.errors.size();
            std::cout << result.cells.size() << " cells -> " << b_outdir << "/bench.{csv,json}\n";
            return finish_table(failures, b_allow);
        } else if (*sel) {
            if (s_cfg_opt->count() + s_from_opt->count() != 1)
                throw CLI::ValidationError("select", "pass exactly one of --config, --from");
            dimest::BenchResult result;
            std::size_t failures = 0;
            if (s_cfg_opt->count()) {
                BenchConfig cfg = dimest::parse_bench_config_file(s_config);
                if (s_seed_opt->count()) cfg.seed = s_seed;
                result = dimest::bench_run(cfg);
                auto js = open_out(s_outdir, "bench.json");
                js << dimest::bench_to_json(result).dump(2) << "\n";
                for (const auto& c : result.cells) failures += c.errors.size();
            } else {
                std::ifstream in(s_from);
                if (!in) throw std::runtime_error("cannot open " + s_from);
                result = dimest::bench_from_json(json::parse(in));
            }
            dimest::SelectionResult selection = dimest::select_hyperparams(result);
            auto csv = open_out(s_outdir, "selection.csv");
            dimest::selection_to_csv(selection, csv);
            auto js = open_out(s_outdir, "selection.json");
            js << dimest::selection_to_json(selection).dump(2) << "\n";
            std::cout << selection.rows.size() << " selection rows -> " << s_outdir
                      << "/selection.{csv,json}\n";
            return finish_table(failures, s_allow);
        } else if (*noi) {
            BenchConfig base = dimest::parse_bench_config_file(n_config);
            dimest::NoiseConfig cfg;
            cfg.grid = base.grid;
            cfg.n = n_n;
            cfg.runs = n_runs_opt->count() ? n_runs : base.runs;
            cfg.seed = n_seed_opt->count() ? n_seed : base.seed;
            dimest::NoiseResult result = dimest::noise_experiment(cfg);
            auto csv = open_out(n_outdir, "noise.csv");
            dimest::noise_to_csv(result, csv);
            auto js = open_out(n_outdir, "noise.json");
            js << dimest::noise_to_json(result).dump(2) << "\n";
            std::size_t failures = 0;
            for (const auto& c : result.cells) failures += c.errors.size();
            std::cout << result.cells.size() << " cells -> " << n_outdir << "/noise.{csv,json}\n";
            return finish_table(failures, n_allow);
        } else if (*cur) {
            if (u_kind == "paraboloid") {
                dimest::ParaboloidConfig cfg;
                if (!u_b.empty()) cfg.b_grid = u_b;
                cfg.negative = u_negative;
                if (!u_est.empty()) cfg.estimator = u_est;
                cfg.alpha = u_alpha;
                cfg.corrected = u_corrected;
                cfg.k_min = u_kmin;
                cfg.k_max = u_kmax;
                cfg.k_step = u_kstep;
                cfg.reps = u_reps;
                cfg.base_count = u_base;
                cfg.seed = u_seed;
                dimest::ParaboloidResult result = dimest::paraboloid_pointwise(cfg);
                auto csv = open_out(u_outdir, "paraboloid.csv");
                dimest::paraboloid_to_csv(result, csv);
                std::cout << result.rows.size() << " (b,k) rows -> " << u_outdir
                          << "/paraboloid.csv\n";
            } else if (u_kind == "torus") {
                dimest::TorusCdfConfig cfg;
                cfg.R = u_R;
                cfg.r = u_r;
                cfg.n = u_n;
                if (!u_est.empty()) cfg.estimator = u_est;
                cfg.params = json::object();
                apply_sets(cfg.params, u_sets);
                cfg.seed = u_seed;
                dimest::TorusCdfResult result = dimest::torus_overestimate_cdf(cfg);
                auto csv = open_out(u_outdir, "torus.csv");
                dimest::torus_to_csv(result, csv);
                std::cout << result.n_over << "/" << cfg.n << " points overestimated; KS D = "
                          << result.ks_stat << ", p = " << result.ks_p << " -> " << u_outdir
                          << "/torus.csv\n";
            } else {
                throw CLI::ValidationError("--kind", "expected paraboloid or torus");
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
