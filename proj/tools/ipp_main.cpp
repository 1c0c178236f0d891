// Command-line front end: fit hyperparameters from survey data, plan paths
// with any of the five algorithms, and run benchmark sweeps to CSV.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipp/errors.hpp"
#include "ipp/gp.hpp"
#include "ipp/graph.hpp"
#include "ipp/planners.hpp"
#include "ipp/radio_sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitTimeLimit = 3;
constexpr int kExitNumerical = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ipp::ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ipp::ValidationError("cannot write file: " + path);
    out << content;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Accepts either one hyperparameters object or a per-AP map; a map collapses
// to the field-wise median so planning sees one representative field.
ipp::Hyperparameters load_planning_hyper(const std::string& path) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ipp::ValidationError(std::string("bad hyperparameters JSON: ") + e.what());
    }
    if (j.contains("sigma_f")) return ipp::hyperparameters_from_json(text);
    if (!j.is_object() || j.empty())
        throw ipp::ValidationError("hyperparameters JSON: expected an object");
    std::vector<double> sf, ls, sn, mc;
    for (const auto& [ap, sub] : j.items()) {
        const ipp::Hyperparameters h = ipp::hyperparameters_from_json(sub.dump());
        sf.push_back(h.sigma_f);
        ls.push_back(h.length_scale);
        sn.push_back(h.sigma_n);
        mc.push_back(h.mean_const);
    }
    ipp::Hyperparameters h;
    h.sigma_f = median(sf);
    h.length_scale = median(ls);
    h.sigma_n = median(sn);
    h.mean_const = median(mc);
    return h;
}

nlohmann::json load_algo_config(const std::string& path, const std::string& algo) {
    if (path.empty()) return nlohmann::json::object();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ipp::ValidationError(std::string("bad config JSON: ") + e.what());
    }
    if (j.contains(algo)) return j[algo];
    return j;
}

ipp::GAConfig ga_config_from_json(const nlohmann::json& j) {
    ipp::GAConfig cfg;
    cfg.pop_size = j.value("pop_size", cfg.pop_size);
    cfg.tournament_size = j.value("tournament_size", cfg.tournament_size);
    cfg.mutation_fraction = j.value("mutation_fraction", cfg.mutation_fraction);
    cfg.generations = j.value("generations", cfg.generations);
    return cfg;
}

ipp::RGConfig rg_config_from_json(const nlohmann::json& j, double time_limit) {
    ipp::RGConfig cfg;
    cfg.recursion_depth = j.value("recursion_depth", cfg.recursion_depth);
    cfg.budget_grid = j.value("budget_grid", cfg.budget_grid);
    cfg.time_limit_s = time_limit;
    return cfg;
}

ipp::EROConfig ero_config_from_json(const nlohmann::json& j) {
    ipp::EROConfig cfg;
    cfg.iterations = j.value("iterations", cfg.iterations);
    return cfg;
}

struct PlanOptions {
    std::string graph_file, hyper_file, pilot_file, config_file, out_file;
    std::string algo = "greedy";
    double budget = 0.0;
    double interval = 0.5;
    double time_limit = 600.0;
    ipp::VertexId start = 0;
    ipp::VertexId terminal = 0;
    uint64_t seed = 0;
};

ipp::PlanResult run_planner(const ipp::PlanRequest& req, const std::string& algo,
                            const nlohmann::json& cfg, double time_limit) {
    if (algo == "greedy") return ipp::greedy_plan(req);
    if (algo == "ga") return ipp::ga_plan(req, ga_config_from_json(cfg));
    if (algo == "rg") return ipp::recursive_greedy_plan(req, rg_config_from_json(cfg, time_limit));
    if (algo == "ero") return ipp::ero_plan(req, ero_config_from_json(cfg));
    if (algo == "bruteforce") return ipp::brute_force_plan(req, time_limit);
    throw ipp::ValidationError("unknown algorithm: " + algo);
}

int cmd_fit(const std::string& pilot_file, const std::string& out_file, uint64_t seed) {
    const ipp::SurveyDataset data = ipp::load_survey_csv(pilot_file);
    if (data.rows.empty()) {
        std::cerr << "error: no usable observations in " << pilot_file << "\n";
        return kExitValidation;
    }
    const ipp::RadioMap map = ipp::fit_radio_map(data, seed);
    for (const std::string& ap : map.dropped_aps)
        std::cerr << "warning: dropped AP " << ap << " (fewer than 5 observations)\n";

    nlohmann::json out = nlohmann::json::object();
    for (const auto& [ap, model] : map.models) {
        out[ap] = nlohmann::json::parse(ipp::to_json_string(model.hyper));
        const double lml =
            ipp::log_marginal_likelihood(model.train_points, model.train_values, model.hyper);
        std::cout << ap << ": log marginal likelihood " << format_double(lml) << "\n";
    }
    write_file(out_file, out.dump(2) + "\n");
    return kExitOk;
}

ipp::PlanRequest build_request(const PlanOptions& opt) {
    ipp::PlanRequest req;
    req.graph = ipp::load_graph_file(opt.graph_file);
    req.start = opt.start;
    req.terminal = opt.terminal;
    req.budget = opt.budget;
    req.sample_interval = opt.interval;
    req.hyper = load_planning_hyper(opt.hyper_file);
    req.seed = opt.seed;
    if (!opt.pilot_file.empty()) req.pilot_points = ipp::load_pilot_points_csv(opt.pilot_file);
    req.validate();
    return req;
}

int cmd_plan(const PlanOptions& opt) {
    const ipp::PlanRequest req = build_request(opt);
    const nlohmann::json cfg = load_algo_config(opt.config_file, opt.algo);
    const ipp::PlanResult result = run_planner(req, opt.algo, cfg, opt.time_limit);

    // The artifact is byte-reproducible: measured runtime goes to stdout only.
    write_file(opt.out_file, ipp::to_json_string(result, /*include_runtime=*/false) + "\n");
    std::cout << result.algorithm << ": cost " << format_double(result.cost) << " m, utility "
              << format_double(result.utility) << " nats, runtime "
              << format_double(result.runtime_s) << " s\n";
    return kExitOk;
}

struct BenchmarkOptions {
    PlanOptions base;
    std::vector<double> budgets;
    std::vector<std::string> algos;
    int seeds = 5;
    std::string survey_file;
    bool parallel = false;
};

struct CellResult {
    std::string row;
    bool ok = false;
    double utility = 0.0, cost = 0.0, runtime = 0.0, mean_error = 0.0;
    bool has_error_metric = false;
};

int cmd_benchmark(const BenchmarkOptions& opt) {
    const ipp::AreaGraph graph = ipp::load_graph_file(opt.base.graph_file);
    const ipp::Hyperparameters hyper = load_planning_hyper(opt.base.hyper_file);
    std::vector<ipp::Point> pilot;
    if (!opt.base.pilot_file.empty())
        pilot = ipp::load_pilot_points_csv(opt.base.pilot_file);

    // Optional localization stage: synthesize test fingerprints on the
    // reference grid once, then score every planned path against them.
    std::optional<ipp::RadioMap> map;
    std::vector<ipp::Point> grid;
    ipp::SurveyDataset test_set;
    if (!opt.survey_file.empty()) {
        map = ipp::fit_radio_map(ipp::load_survey_csv(opt.survey_file), opt.base.seed);
        grid = ipp::make_reference_grid(graph);
        test_set = ipp::synthesize_fingerprints(*map, grid, opt.base.seed + 77);
    }

    auto run_cell = [&](const std::string& algo, double budget, uint64_t seed) {
        CellResult cell;
        std::ostringstream row;
        row << algo << ',' << format_double(budget) << ',' << seed << ',';
        try {
            ipp::PlanRequest req;
            req.graph = graph;
            req.start = opt.base.start;
            req.terminal = opt.base.terminal;
            req.budget = budget;
            req.sample_interval = opt.base.interval;
            req.hyper = hyper;
            req.pilot_points = pilot;
            req.seed = seed;
            req.validate();
            const nlohmann::json cfg = load_algo_config(opt.base.config_file, algo);
            const ipp::PlanResult result = run_planner(req, algo, cfg, opt.base.time_limit);
            cell.ok = true;
            cell.utility = result.utility;
            cell.cost = result.cost;
            cell.runtime = result.runtime_s;
            row << format_double(result.utility) << ',' << format_double(result.cost) << ','
                << format_double(result.runtime_s) << ',';
            if (map) {
                const ipp::LocalizationReport report = ipp::evaluate_plan_error(
                    result, graph, *map, grid, test_set, opt.base.interval, seed);
                cell.mean_error = report.mean_error;
                cell.has_error_metric = true;
                row << format_double(report.mean_error) << ",ok";
            } else {
                row << ",ok";
            }
        } catch (const ipp::TimeLimitError&) {
            row << ",,,,timelimit";
        } catch (const std::exception& e) {
            row << ",,,,failed";
            std::cerr << "run failed (" << algo << ", budget " << format_double(budget)
                      << ", seed " << seed << "): " << e.what() << "\n";
        }
        cell.row = row.str();
        return cell;
    };

    std::ofstream out(opt.base.out_file);
    if (!out) throw ipp::ValidationError("cannot write file: " + opt.base.out_file);
    out << "algorithm,budget,seed,utility,cost,runtime_s,mean_error,status\n";

    bool any_failed = false;
    for (const std::string& algo : opt.algos) {
        for (double budget : opt.budgets) {
            std::vector<CellResult> cells;
            if (opt.parallel) {
                std::vector<std::future<CellResult>> futures;
                for (int s = 0; s < opt.seeds; ++s)
                    futures.push_back(std::async(std::launch::async, run_cell, algo, budget,
                                                 static_cast<uint64_t>(s)));
                for (auto& f : futures) cells.push_back(f.get());
            } else {
                for (int s = 0; s < opt.seeds; ++s)
                    cells.push_back(run_cell(algo, budget, static_cast<uint64_t>(s)));
            }

            int ok_count = 0;
            double u = 0, c = 0, r = 0, e = 0;
            bool has_err = false;
            for (const CellResult& cell : cells) {
                out << cell.row << "\n";
                out.flush();  // partial results survive a later failure
                if (!cell.ok) {
                    any_failed = true;
                    continue;
                }
                ++ok_count;
                u += cell.utility;
                c += cell.cost;
                r += cell.runtime;
                if (cell.has_error_metric) {
                    e += cell.mean_error;
                    has_err = true;
                }
            }
            out << algo << ',' << format_double(budget) << ",avg,";
            if (ok_count > 0) {
                out << format_double(u / ok_count) << ',' << format_double(c / ok_count) << ','
                    << format_double(r / ok_count) << ',';
                if (has_err) out << format_double(e / ok_count);
                out << ",ok";
            } else {
                out << ",,,,failed";
            }
            out << "\n";
            out.flush();
        }
    }
    return any_failed ? kExitValidation : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Informative path planning for fingerprint site surveys"};
    app.require_subcommand(1);

    std::string pilot_file, out_file;
    uint64_t fit_seed = 0;
    CLI::App* fit = app.add_subcommand("fit", "Fit per-AP GP hyperparameters from a pilot CSV");
    fit->add_option("--pilot", pilot_file, "pilot CSV (x,y,ap,rss)")->required();
    fit->add_option("--out", out_file, "output hyperparameters JSON")->required();
    fit->add_option("--seed", fit_seed, "fit seed");

    PlanOptions plan_opt;
    CLI::App* plan = app.add_subcommand("plan", "Plan a survey walk");
    plan->add_option("--graph", plan_opt.graph_file, "area graph JSON")->required();
    plan->add_option("--hyper", plan_opt.hyper_file, "hyperparameters JSON")->required();
    plan->add_option("--pilot", plan_opt.pilot_file, "pilot CSV (conditioning locations)");
    plan->add_option("--budget", plan_opt.budget, "budget in meters")->required();
    plan->add_option("--start", plan_opt.start, "start vertex id")->required();
    plan->add_option("--end", plan_opt.terminal, "terminal vertex id")->required();
    plan->add_option("--algo", plan_opt.algo, "greedy|ga|rg|ero|bruteforce")
        ->check(CLI::IsMember({"greedy", "ga", "rg", "ero", "bruteforce"}))
        ->required();
    plan->add_option("--interval", plan_opt.interval, "sample interval in meters (default 0.5)");
    plan->add_option("--seed", plan_opt.seed, "random seed");
    plan->add_option("--time-limit", plan_opt.time_limit, "seconds, for bruteforce and rg");
    plan->add_option("--config", plan_opt.config_file, "algorithm config JSON");
    plan->add_option("--out", plan_opt.out_file, "output PlanResult JSON")->required();

    BenchmarkOptions bench_opt;
    std::string budgets_arg, algos_arg;
    CLI::App* bench = app.add_subcommand("benchmark", "Sweep algorithms x budgets x seeds to CSV");
    bench->add_option("--graph", bench_opt.base.graph_file, "area graph JSON")->required();
    bench->add_option("--hyper", bench_opt.base.hyper_file, "hyperparameters JSON")->required();
    bench->add_option("--pilot", bench_opt.base.pilot_file, "pilot CSV");
    bench->add_option("--budgets", budgets_arg, "comma-separated budgets")->required();
    bench->add_option("--algos", algos_arg, "comma-separated algorithms")->required();
    bench->add_option("--seeds", bench_opt.seeds, "seeds per run (default 5)");
    bench->add_option("--start", bench_opt.base.start, "start vertex id")->required();
    bench->add_option("--end", bench_opt.base.terminal, "terminal vertex id")->required();
    bench->add_option("--interval", bench_opt.base.interval, "sample interval in meters");
    bench->add_option("--seed", bench_opt.base.seed, "base seed for the evaluation stage");
    bench->add_option("--time-limit", bench_opt.base.time_limit, "seconds per run");
    bench->add_option("--config", bench_opt.base.config_file, "algorithm config JSON");
    bench->add_option("--survey", bench_opt.survey_file,
                      "survey CSV for the localization-error column");
    bench->add_flag("--parallel", bench_opt.parallel, "run cells concurrently");
    bench->add_option("--out", bench_opt.base.out_file, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (fit->parsed()) return cmd_fit(pilot_file, out_file, fit_seed);
        if (plan->parsed()) return cmd_plan(plan_opt);
        if (bench->parsed()) {
            for (std::stringstream ss(budgets_arg); ss.good();) {
                std::string tok;
                std::getline(ss, tok, ',');
                if (!tok.empty()) bench_opt.budgets.push_back(std::stod(tok));
            }
            for (std::stringstream ss(algos_arg); ss.good();) {
                std::string tok;
                std::getline(ss, tok, ',');
                if (!tok.empty()) bench_opt.algos.push_back(tok);
            }
            if (bench_opt.budgets.empty() || bench_opt.algos.empty())
                throw ipp::ValidationError("benchmark needs at least one budget and algorithm");
            return cmd_benchmark(bench_opt);
        }
    } catch (const ipp::TimeLimitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTimeLimit;
    } catch (const ipp::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const ipp::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
