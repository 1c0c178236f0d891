#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ipp/gp.hpp"
#include "ipp/graph.hpp"
#include "ipp/planners.hpp"

namespace ipp {

struct SurveyRow {
    Point location;
    std::string ap;
    double rss = 0.0;  // dBm
};

// Raw fingerprint observations: one row per (location, AP) reading.
struct SurveyDataset {
    std::vector<SurveyRow> rows;

    std::vector<std::string> ap_names() const;  // sorted, unique
    // Rows grouped by exact location, in first-appearance order.
    std::vector<std::pair<Point, std::vector<SurveyRow>>> group_by_location() const;
};

SurveyDataset load_survey_csv(const std::string& path);
void save_survey_csv(const SurveyDataset& data, const std::string& path);

// One fitted GP field.
struct ApModel {
    Hyperparameters hyper;
    std::vector<Point> train_points;
    std::vector<double> train_values;
};

// The fitted per-AP model set M.
struct RadioMap {
    std::map<std::string, ApModel> models;
    std::vector<std::string> dropped_aps;  // fewer than min_rows observations
};

// Fits one GP per AP with mean_const at that AP's empirical mean. APs with
// fewer than min_rows observations are dropped (recorded in dropped_aps);
// throws ValidationError when nothing survives.
RadioMap fit_radio_map(const SurveyDataset& data, uint64_t seed, int min_rows = 5,
                       const FitOptions& fit_opts = {});

// One posterior-predictive draw per (AP, point): N(mean_i, var_i + sigma_n^2),
// independent across APs and points. Deterministic under seed.
SurveyDataset synthesize_fingerprints(const RadioMap& map, const std::vector<Point>& points,
                                      uint64_t seed);

// Maximum-likelihood fingerprint matcher over a fixed reference grid.
// Fits one GP per AP on the training data (hyperparameters refit unless
// refit_hyper is false, in which case init_hyper is used as-is).
class Localizer {
public:
    Localizer(const SurveyDataset& train, std::vector<Point> reference_grid, uint64_t seed = 0,
              bool refit_hyper = true, const Hyperparameters& init_hyper = {},
              const FitOptions& fit_opts = {});

    // Argmax-likelihood reference location; smallest grid index wins ties.
    // Observations for APs absent from the training set are skipped.
    Point localize(const std::vector<std::pair<std::string, double>>& test_obs) const;

    const std::vector<Point>& reference_grid() const { return grid_; }

private:
    struct ApPrediction {
        std::vector<double> mean;
        std::vector<double> var;  // posterior variance + sigma_n^2
    };
    std::vector<Point> grid_;
    std::map<std::string, ApPrediction> predictions_;
};

// Convenience one-shot form of Localizer::localize.
Point localize(const SurveyDataset& train, const std::vector<Point>& reference_grid,
               const std::vector<std::pair<std::string, double>>& test_obs);

struct LocalizationReport {
    struct Row {
        Point truth;
        Point predicted;
        double error = 0.0;  // meters
    };
    std::vector<Row> rows;
    double mean_error = 0.0;
};

std::string to_json_string(const LocalizationReport& report);

// The evaluation pipeline: sample the planned walk, synthesize training
// fingerprints from the map, localize each test location's fingerprints.
LocalizationReport evaluate_plan_error(const PlanResult& plan, const AreaGraph& g,
                                       const RadioMap& map,
                                       const std::vector<Point>& reference_grid,
                                       const SurveyDataset& test_set, double interval,
                                       uint64_t seed, bool refit_hyper = true,
                                       const FitOptions& fit_opts = {});

// Pearson correlation between per-path utility and mean localization error.
// Throws ValidationError on fewer than 10 paths or zero variance in a series.
double utility_error_correlation(const std::vector<Path>& paths, const AreaGraph& g,
                                 const UtilityContext& ctx, const RadioMap& map,
                                 const std::vector<Point>& reference_grid,
                                 const SurveyDataset& test_set, double interval, uint64_t seed,
                                 bool refit_hyper = true, const FitOptions& fit_opts = {});

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

// Uniform grid over the graph's bounding box, keeping points within
// max_edge_distance of some edge (the walkable space).
std::vector<Point> make_reference_grid(const AreaGraph& g, double spacing = 1.0,
                                       double max_edge_distance = 0.5);

}  // namespace ipp
