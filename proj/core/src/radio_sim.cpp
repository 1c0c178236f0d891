#include "ipp/radio_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ipp/errors.hpp"
#include "rand_util.hpp"

namespace ipp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct ApData {
    std::vector<Point> points;
    std::vector<double> values;
};

std::map<std::string, ApData> group_by_ap(const SurveyDataset& data) {
    std::map<std::string, ApData> groups;
    for (const SurveyRow& row : data.rows) {
        groups[row.ap].points.push_back(row.location);
        groups[row.ap].values.push_back(row.rss);
    }
    return groups;
}

Hyperparameters heuristic_init(const ApData& d) {
    double mean = 0.0;
    for (double v : d.values) mean += v;
    mean /= static_cast<double>(d.values.size());
    double var = 0.0;
    for (double v : d.values) var += (v - mean) * (v - mean);
    const double sd = std::max(0.5, std::sqrt(var / static_cast<double>(d.values.size())));

    double min_x = d.points[0].x, max_x = d.points[0].x;
    double min_y = d.points[0].y, max_y = d.points[0].y;
    for (const Point& p : d.points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    Hyperparameters h;
    h.sigma_f = sd;
    h.length_scale = std::max(0.5, 0.25 * std::hypot(max_x - min_x, max_y - min_y));
    h.sigma_n = std::max(0.1, 0.2 * sd);
    h.mean_const = mean;
    return h;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::vector<std::string> SurveyDataset::ap_names() const {
    std::set<std::string> names;
    for (const SurveyRow& r : rows) names.insert(r.ap);
    return {names.begin(), names.end()};
}

std::vector<std::pair<Point, std::vector<SurveyRow>>> SurveyDataset::group_by_location() const {
    std::vector<std::pair<Point, std::vector<SurveyRow>>> groups;
    std::map<std::pair<double, double>, std::size_t> index;
    for (const SurveyRow& r : rows) {
        const auto key = std::make_pair(r.location.x, r.location.y);
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, groups.size());
            groups.push_back({r.location, {r}});
        } else {
            groups[it->second].second.push_back(r);
        }
    }
    return groups;
}

SurveyDataset load_survey_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open survey CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("survey CSV is empty");

    SurveyDataset data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string xs, ys, ap, rs;
        if (!std::getline(ss, xs, ',') || !std::getline(ss, ys, ',') ||
            !std::getline(ss, ap, ',') || !std::getline(ss, rs))
            throw ValidationError("survey CSV: bad row at line " + std::to_string(line_no));
        try {
            SurveyRow row{Point{std::stod(xs), std::stod(ys)}, ap, std::stod(rs)};
            if (!std::isfinite(row.location.x) || !std::isfinite(row.location.y) ||
                !std::isfinite(row.rss))
                throw ValidationError("survey CSV: non-finite value");
            data.rows.push_back(std::move(row));
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            throw ValidationError("survey CSV: bad number at line " + std::to_string(line_no));
        }
    }
    return data;
}

void save_survey_csv(const SurveyDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write survey CSV: " + path);
    out << "x,y,ap,rss\n";
    for (const SurveyRow& r : data.rows)
        out << format_double(r.location.x) << ',' << format_double(r.location.y) << ',' << r.ap
            << ',' << format_double(r.rss) << '\n';
}

RadioMap fit_radio_map(const SurveyDataset& data, uint64_t seed, int min_rows,
                       const FitOptions& fit_opts) {
    RadioMap map;
    uint64_t ap_index = 0;
    for (const auto& [ap, d] : group_by_ap(data)) {
        ++ap_index;
        if (d.points.size() < static_cast<std::size_t>(min_rows)) {
            map.dropped_aps.push_back(ap);
            continue;
        }
        FitOptions opts = fit_opts;
        opts.seed = seed * 1315423911ull + ap_index;  // distinct stream per AP
        const Hyperparameters init = heuristic_init(d);
        ApModel model;
        model.hyper = fit_hyperparameters(d.points, d.values, init, opts);
        model.train_points = d.points;
        model.train_values = d.values;
        map.models.emplace(ap, std::move(model));
    }
    if (map.models.empty())
        throw ValidationError("fit_radio_map: no AP has enough observations");
    return map;
}

SurveyDataset synthesize_fingerprints(const RadioMap& map, const std::vector<Point>& points,
                                      uint64_t seed) {
    if (points.empty()) throw ValidationError("synthesize_fingerprints: no points");
    SurveyDataset out;
    std::mt19937_64 rng(seed);
    for (const auto& [ap, model] : map.models) {  // sorted by AP name: deterministic
        const Posterior post =
            gp_posterior(model.train_points, model.train_values, points, model.hyper);
        const double noise_var = model.hyper.sigma_n * model.hyper.sigma_n;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto idx = static_cast<Eigen::Index>(i);
            const double var = std::max(0.0, post.cov(idx, idx)) + noise_var;
            const double value = post.mean(idx) + std::sqrt(var) * detail::normal01(rng);
            out.rows.push_back({points[i], ap, value});
        }
    }
    return out;
}

Localizer::Localizer(const SurveyDataset& train, std::vector<Point> reference_grid, uint64_t seed,
                     bool refit_hyper, const Hyperparameters& init_hyper,
                     const FitOptions& fit_opts)
    : grid_(std::move(reference_grid)) {
    if (grid_.empty()) throw ValidationError("Localizer: empty reference grid");
    if (train.rows.empty()) throw ValidationError("Localizer: empty training data");

    uint64_t ap_index = 0;
    for (const auto& [ap, d] : group_by_ap(train)) {
        ++ap_index;
        Hyperparameters h = init_hyper;
        if (refit_hyper && d.points.size() >= 5) {
            FitOptions opts = fit_opts;
            opts.seed = seed * 2654435761ull + ap_index;
            h = fit_hyperparameters(d.points, d.values, heuristic_init(d), opts);
        } else if (refit_hyper) {
            h = heuristic_init(d);  // too few rows to fit: data-driven fallback
        }
        const Posterior post = gp_posterior(d.points, d.values, grid_, h);
        ApPrediction pred;
        pred.mean.resize(grid_.size());
        pred.var.resize(grid_.size());
        const double noise_var = h.sigma_n * h.sigma_n;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const auto idx = static_cast<Eigen::Index>(i);
            pred.mean[i] = post.mean(idx);
            pred.var[i] = std::max(1e-12, post.cov(idx, idx)) + noise_var;
        }
        predictions_.emplace(ap, std::move(pred));
    }
}

Point Localizer::localize(const std::vector<std::pair<std::string, double>>& test_obs) const {
    std::size_t best = 0;
    double best_loglik = -std::numeric_limits<double>::infinity();
    bool any_ap = false;
    for (std::size_t r = 0; r < grid_.size(); ++r) {
        double loglik = 0.0;
        for (const auto& [ap, rss] : test_obs) {
            auto it = predictions_.find(ap);
            if (it == predictions_.end()) continue;  // AP unseen in training: skipped
            if (r == 0) any_ap = true;
            const double v = it->second.var[r];
            const double d = rss - it->second.mean[r];
            loglik += -0.5 * (kLog2Pi + std::log(v)) - 0.5 * d * d / v;
        }
        if (r == 0 && !any_ap)
            throw ValidationError("localize: no test AP present in the training data");
        if (loglik > best_loglik) {
            best_loglik = loglik;
            best = r;
        }
    }
    return grid_[best];
}

Point localize(const SurveyDataset& train, const std::vector<Point>& reference_grid,
               const std::vector<std::pair<std::string, double>>& test_obs) {
    return Localizer(train, reference_grid).localize(test_obs);
}

std::string to_json_string(const LocalizationReport& report) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json p;
        p["true"] = {row.truth.x, row.truth.y};
        p["pred"] = {row.predicted.x, row.predicted.y};
        p["error"] = row.error;
        points.push_back(std::move(p));
    }
    nlohmann::json j;
    j["mean_error"] = report.mean_error;
    j["points"] = std::move(points);
    return j.dump();
}

LocalizationReport evaluate_plan_error(const PlanResult& plan, const AreaGraph& g,
                                       const RadioMap& map,
                                       const std::vector<Point>& reference_grid,
                                       const SurveyDataset& test_set, double interval,
                                       uint64_t seed, bool refit_hyper,
                                       const FitOptions& fit_opts) {
    const auto groups = test_set.group_by_location();
    if (groups.empty()) throw ValidationError("evaluate_plan_error: empty test set");

    const auto samples = sample_along_path(plan.path, g, interval);
    const SurveyDataset train = synthesize_fingerprints(map, samples, seed);
    const Localizer localizer(train, reference_grid, seed, refit_hyper, {}, fit_opts);

    LocalizationReport report;
    double total = 0.0;
    for (const auto& [truth, rows] : groups) {
        std::vector<std::pair<std::string, double>> obs;
        obs.reserve(rows.size());
        for (const SurveyRow& r : rows) obs.emplace_back(r.ap, r.rss);
        const Point predicted = localizer.localize(obs);
        const double error = distance(truth, predicted);
        report.rows.push_back({truth, predicted, error});
        total += error;
    }
    report.mean_error = total / static_cast<double>(report.rows.size());
    return report;
}

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw ValidationError("pearson_correlation: need two same-length series");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0)
        throw ValidationError("pearson_correlation: zero variance in a series");
    return sxy / std::sqrt(sxx * syy);
}

double utility_error_correlation(const std::vector<Path>& paths, const AreaGraph& g,
                                 const UtilityContext& ctx, const RadioMap& map,
                                 const std::vector<Point>& reference_grid,
                                 const SurveyDataset& test_set, double interval, uint64_t seed,
                                 bool refit_hyper, const FitOptions& fit_opts) {
    if (paths.size() < 10)
        throw ValidationError("utility_error_correlation: need at least 10 paths");

    std::vector<double> utilities, errors;
    utilities.reserve(paths.size());
    errors.reserve(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        utilities.push_back(path_utility(ctx, sample_along_path(paths[i], g, interval)));
        PlanResult plan;
        plan.path = paths[i];
        const LocalizationReport report = evaluate_plan_error(
            plan, g, map, reference_grid, test_set, interval, seed + i, refit_hyper, fit_opts);
        errors.push_back(report.mean_error);
    }
    return pearson_correlation(utilities, errors);
}

std::vector<Point> make_reference_grid(const AreaGraph& g, double spacing,
                                       double max_edge_distance) {
    if (!(spacing > 0.0)) throw ValidationError("make_reference_grid: spacing must be positive");
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (const auto& [id, p] : g.vertices()) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }

    std::vector<Point> grid;
    const auto nx = static_cast<int>(std::floor((max_x - min_x) / spacing + 1e-9));
    const auto ny = static_cast<int>(std::floor((max_y - min_y) / spacing + 1e-9));
    for (int iy = 0; iy <= ny; ++iy) {
        for (int ix = 0; ix <= nx; ++ix) {
            const Point p{min_x + ix * spacing, min_y + iy * spacing};
            bool near_edge = g.edges().empty();
            for (const Edge& e : g.edges()) {
                if (point_segment_distance(p, g.point(e.u), g.point(e.v)) <= max_edge_distance) {
                    near_edge = true;
                    break;
                }
            }
            if (near_edge) grid.push_back(p);
        }
    }
    return grid;
}

}  // namespace ipp
