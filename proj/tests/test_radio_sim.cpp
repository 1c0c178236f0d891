#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>

#include "ipp/errors.hpp"
#include "ipp/radio_sim.hpp"

using namespace ipp;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Hyperparameters map_hyper(double sigma_f = 6.0, double l = 1.5, double sigma_n = 0.5,
                          double mean = -60.0) {
    Hyperparameters h;
    h.sigma_f = sigma_f;
    h.length_scale = l;
    h.sigma_n = sigma_n;
    h.mean_const = mean;
    return h;
}

FitOptions quick_fit() {
    FitOptions opts;
    opts.starts = 3;
    opts.max_iterations = 80;
    return opts;
}

std::vector<double> draw_prior_field(const std::vector<Point>& pts, const Hyperparameters& h,
                                     uint64_t seed) {
    Eigen::MatrixXd k = cov_matrix(pts, pts, h);
    k.diagonal().array() += 1e-8 * h.sigma_f * h.sigma_f;
    const Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(k).matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::VectorXd z(pts.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = n01(rng);
    const Eigen::VectorXd f = chol * z;
    std::vector<double> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        out[i] = h.mean_const + f(static_cast<Eigen::Index>(i));
    return out;
}

// RadioMap built directly from a GP prior draw, bypassing the fitter.
RadioMap synthetic_map(const std::vector<Point>& train_pts, int n_aps, uint64_t seed,
                       const Hyperparameters& h) {
    RadioMap map;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, h.sigma_n);
    for (int a = 0; a < n_aps; ++a) {
        ApModel model;
        model.hyper = h;
        model.train_points = train_pts;
        model.train_values = draw_prior_field(train_pts, h, seed * 31 + a);
        for (double& v : model.train_values) v += noise(rng);
        map.models.emplace("ap_" + std::to_string(a), std::move(model));
    }
    return map;
}

std::vector<Point> grid_points(int nx, int ny, double spacing) {
    std::vector<Point> pts;
    for (int r = 0; r < ny; ++r)
        for (int c = 0; c < nx; ++c) pts.push_back({c * spacing, r * spacing});
    return pts;
}

AreaGraph unit_grid(int nx, int ny) {
    std::map<VertexId, Point> vertices;
    std::vector<Edge> edges;
    for (int r = 0; r < ny; ++r) {
        for (int c = 0; c < nx; ++c) {
            const VertexId id = r * nx + c;
            vertices[id] = {double(c), double(r)};
            if (c + 1 < nx) edges.push_back({id, id + 1, 1.0});
            if (r + 1 < ny) edges.push_back({id, id + nx, 1.0});
        }
    }
    return AreaGraph(std::move(vertices), std::move(edges));
}

}  // namespace

TEST_CASE("survey CSV round trip and grouping") {
    SurveyDataset data;
    data.rows = {{{0, 0}, "ap_b", -50.0}, {{1, 0}, "ap_a", -55.5}, {{0, 0}, "ap_a", -51.25}};
    const std::string path = "/tmp/ipp_test_survey.csv";
    save_survey_csv(data, path);
    const auto back = load_survey_csv(path);
    std::remove(path.c_str());
    REQUIRE(back.rows.size() == 3);
    CHECK(back.rows[0].ap == "ap_b");
    CHECK(back.rows[2].rss == doctest::Approx(-51.25));
    CHECK(back.ap_names() == std::vector<std::string>{"ap_a", "ap_b"});

    const auto groups = back.group_by_location();
    REQUIRE(groups.size() == 2);  // (0,0) appears twice, first-appearance order
    CHECK(groups[0].second.size() == 2);
    CHECK(groups[1].first.x == doctest::Approx(1.0));
}

TEST_CASE("fit_radio_map drops thin APs and reports them") {
    SurveyDataset data;
    const auto pts = grid_points(3, 2, 1.0);
    const auto field = draw_prior_field(pts, map_hyper(), 5);
    for (std::size_t i = 0; i < pts.size(); ++i)
        data.rows.push_back({pts[i], "ap_full", field[i]});
    for (int i = 0; i < 3; ++i)
        data.rows.push_back({pts[static_cast<std::size_t>(i)], "ap_thin", -50.0});

    const auto map = fit_radio_map(data, 1, 5, quick_fit());
    CHECK(map.models.size() == 1);
    CHECK(map.models.count("ap_full") == 1);
    REQUIRE(map.dropped_aps.size() == 1);
    CHECK(map.dropped_aps[0] == "ap_thin");

    SurveyDataset tiny;
    tiny.rows = {{{0, 0}, "x", -50.0}};
    CHECK_THROWS_AS(fit_radio_map(tiny, 1), ValidationError);
}

TEST_CASE("fit_radio_map is deterministic under a fixed seed") {
    SurveyDataset data;
    const auto pts = grid_points(4, 4, 1.0);
    const auto field = draw_prior_field(pts, map_hyper(), 9);
    for (std::size_t i = 0; i < pts.size(); ++i) data.rows.push_back({pts[i], "ap", field[i]});
    const auto a = fit_radio_map(data, 3, 5, quick_fit());
    const auto b = fit_radio_map(data, 3, 5, quick_fit());
    CHECK(to_json_string(a.models.at("ap").hyper) == to_json_string(b.models.at("ap").hyper));
}

TEST_CASE("fit_radio_map recovers the length scale of a synthetic field") {
    const double true_l = 2.0;
    const auto truth = map_hyper(4.0, true_l, 0.5);
    const auto pts = grid_points(8, 8, 1.0);
    SurveyDataset data;
    std::mt19937_64 rng(17);
    std::normal_distribution<double> noise(0.0, truth.sigma_n);
    const auto field = draw_prior_field(pts, truth, 17);
    for (std::size_t i = 0; i < pts.size(); ++i)
        data.rows.push_back({pts[i], "ap", field[i] + noise(rng)});

    const auto map = fit_radio_map(data, 2, 5, quick_fit());
    const double fitted_l = map.models.at("ap").hyper.length_scale;
    CHECK(fitted_l >= true_l / 2.0);
    CHECK(fitted_l <= true_l * 2.0);
}

TEST_CASE("synthesize_fingerprints determinism and distribution") {
    const auto pts = grid_points(4, 4, 0.75);
    const auto map = synthetic_map(pts, 2, 11, map_hyper());

    SUBCASE("same seed gives identical rows, different seeds differ") {
        const auto a = synthesize_fingerprints(map, {{1, 1}, {2, 0.5}}, 5);
        const auto b = synthesize_fingerprints(map, {{1, 1}, {2, 0.5}}, 5);
        REQUIRE(a.rows.size() == b.rows.size());
        for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].rss == b.rows[i].rss);
        const auto c = synthesize_fingerprints(map, {{1, 1}, {2, 0.5}}, 6);
        bool any_diff = false;
        for (std::size_t i = 0; i < a.rows.size(); ++i)
            any_diff = any_diff || a.rows[i].rss != c.rows[i].rss;
        CHECK(any_diff);
    }

    SUBCASE("sample mean near a dense site tracks the posterior mean") {
        const Point site{1.0, 1.0};
        const auto& model = map.models.at("ap_0");
        const auto post =
            gp_posterior(model.train_points, model.train_values, {site}, model.hyper);
        const double sd =
            std::sqrt(post.cov(0, 0) + model.hyper.sigma_n * model.hyper.sigma_n);
        double sum = 0.0;
        const int n = 1000;
        for (int i = 0; i < n; ++i) {
            const auto draw = synthesize_fingerprints(map, {site}, 1000 + i);
            sum += draw.rows[0].rss;  // rows sorted by AP name, ap_0 first
        }
        const double mean = sum / n;
        CHECK(std::abs(mean - post.mean(0)) <= 3.0 * sd / std::sqrt(double(n)));
    }

    SUBCASE("far from training data the variance reverts to the prior") {
        const Point far{400.0, 400.0};
        const auto& model = map.models.at("ap_0");
        double sum = 0.0, sum2 = 0.0;
        const int n = 1000;
        for (int i = 0; i < n; ++i) {
            const auto draw = synthesize_fingerprints(map, {far}, 5000 + i);
            sum += draw.rows[0].rss;
            sum2 += draw.rows[0].rss * draw.rows[0].rss;
        }
        const double var = sum2 / n - (sum / n) * (sum / n);
        const double expected = model.hyper.sigma_f * model.hyper.sigma_f +
                                model.hyper.sigma_n * model.hyper.sigma_n;
        CHECK(var >= 0.8 * expected);
        CHECK(var <= 1.2 * expected);
    }
}

TEST_CASE("localize picks the reference whose predictions match") {
    const auto pts = grid_points(4, 4, 1.0);
    const auto map = synthetic_map(pts, 3, 23, map_hyper(6.0, 1.5, 0.3));
    const std::vector<Point> refs{{0.0, 0.0}, {3.0, 0.0}, {0.0, 3.0}, {3.0, 3.0}};

    // Dense training set synthesized from the map itself.
    const auto train = synthesize_fingerprints(map, pts, 31);
    const Localizer loc(train, refs, 1, /*refit_hyper=*/false, map_hyper(6.0, 1.5, 0.3));

    for (std::size_t r = 0; r < refs.size(); ++r) {
        // Fingerprint set exactly to the per-AP posterior means at refs[r].
        std::vector<std::pair<std::string, double>> obs;
        for (const auto& [ap, model] : map.models) {
            SurveyDataset per_ap;
            for (const SurveyRow& row : train.rows)
                if (row.ap == ap) per_ap.rows.push_back(row);
            std::vector<Point> tp;
            std::vector<double> tv;
            for (const SurveyRow& row : per_ap.rows) {
                tp.push_back(row.location);
                tv.push_back(row.rss);
            }
            const auto post = gp_posterior(tp, tv, {refs[r]}, map_hyper(6.0, 1.5, 0.3));
            obs.emplace_back(ap, post.mean(0));
        }
        const Point predicted = loc.localize(obs);
        CHECK(predicted.x == doctest::Approx(refs[r].x));
        CHECK(predicted.y == doctest::Approx(refs[r].y));
    }
}

TEST_CASE("localize with one AP reduces to the nearest posterior mean") {
    SurveyDataset train;
    train.rows = {{{0, 0}, "ap", -40.0}, {{10, 0}, "ap", -70.0}};
    const std::vector<Point> refs{{0.0, 0.0}, {10.0, 0.0}};
    const auto h = map_hyper(10.0, 3.0, 1.0, -55.0);
    const Localizer loc(train, refs, 0, false, h);

    CHECK(loc.localize({{"ap", -42.0}}).x == doctest::Approx(0.0));
    CHECK(loc.localize({{"ap", -68.0}}).x == doctest::Approx(10.0));
}

TEST_CASE("localize matches a hand-computed two-reference likelihood") {
    SurveyDataset train;
    train.rows = {{{0, 0}, "a", -40.0}, {{6, 0}, "a", -60.0},
                  {{0, 0}, "b", -65.0}, {{6, 0}, "b", -45.0}};
    const std::vector<Point> refs{{0.0, 0.0}, {6.0, 0.0}};
    const auto h = map_hyper(8.0, 2.0, 1.0, -52.0);
    const Localizer loc(train, refs, 0, false, h);

    // Scalar replication: per AP, posterior at both refs from the 2x2 system.
    const auto posterior_at = [&](double y0, double y1) {
        const double sf2 = 64.0, jit = 1e-8 * sf2;
        const double a = sf2 + 1.0 + jit;          // k(0)+sigma_n^2+jitter
        const double b = sf2 * std::exp(-3.0);     // k(|0-6|/2)
        const double det = a * a - b * b;
        const double i00 = a / det, i01 = -b / det;
        const double r0 = y0 - h.mean_const, r1 = y1 - h.mean_const;
        // test point coincides with train point 0 / 1
        const double k0 = sf2, k1 = b;  // covariances from ref0 to trains
        struct {
            double mean0, var0, mean1, var1;
        } out{};
        out.mean0 = h.mean_const + k0 * (i00 * r0 + i01 * r1) + k1 * (i01 * r0 + i00 * r1);
        out.var0 = sf2 - (k0 * (i00 * k0 + i01 * k1) + k1 * (i01 * k0 + i00 * k1)) + 1.0;
        out.mean1 = h.mean_const + k1 * (i00 * r0 + i01 * r1) + k0 * (i01 * r0 + i00 * r1);
        out.var1 = sf2 - (k1 * (i00 * k1 + i01 * k0) + k0 * (i01 * k1 + i00 * k0)) + 1.0;
        return out;
    };
    const auto pa = posterior_at(-40.0, -60.0);
    const auto pb = posterior_at(-65.0, -45.0);

    const std::vector<std::pair<std::string, double>> obs{{"a", -43.0}, {"b", -62.0}};
    const auto loglik = [&](double mean_a, double var_a, double mean_b, double var_b) {
        const double da = obs[0].second - mean_a, db = obs[1].second - mean_b;
        return -0.5 * (kLog2Pi + std::log(var_a)) - 0.5 * da * da / var_a -
               0.5 * (kLog2Pi + std::log(var_b)) - 0.5 * db * db / var_b;
    };
    const double ll_ref0 = loglik(pa.mean0, pa.var0, pb.mean0, pb.var0);
    const double ll_ref1 = loglik(pa.mean1, pa.var1, pb.mean1, pb.var1);
    const Point expected = (ll_ref0 >= ll_ref1) ? refs[0] : refs[1];
    const Point got = loc.localize(obs);
    CHECK(got.x == doctest::Approx(expected.x));
    CHECK(ll_ref0 > ll_ref1);  // the observation sits closer to ref0's field
}

TEST_CASE("localize is invariant under a common RSS shift") {
    SurveyDataset train;
    train.rows = {{{0, 0}, "ap", -40.0}, {{5, 0}, "ap", -62.0}, {{2.5, 0}, "ap", -50.0}};
    const std::vector<Point> refs{{0.0, 0.0}, {2.5, 0.0}, {5.0, 0.0}};
    auto h = map_hyper(8.0, 2.0, 1.0, -51.0);
    const Localizer base(train, refs, 0, false, h);

    const double shift = 17.5;
    SurveyDataset shifted = train;
    for (SurveyRow& r : shifted.rows) r.rss += shift;
    h.mean_const += shift;
    const Localizer moved(shifted, refs, 0, false, h);

    for (double obs : {-41.0, -49.5, -60.0}) {
        const Point a = base.localize({{"ap", obs}});
        const Point b = moved.localize({{"ap", obs + shift}});
        CHECK(a.x == doctest::Approx(b.x));
        CHECK(a.y == doctest::Approx(b.y));
    }
}

TEST_CASE("localize rejects fingerprints with no usable AP") {
    SurveyDataset train;
    train.rows = {{{0, 0}, "ap", -40.0}, {{1, 0}, "ap", -42.0}};
    const Localizer loc(train, {{0.0, 0.0}}, 0, false, map_hyper());
    CHECK_THROWS_AS(loc.localize({{"unknown", -50.0}}), ValidationError);
}

TEST_CASE("evaluate_plan_error reports exact means and wins with longer budgets") {
    const auto g = unit_grid(3, 3);
    const auto train_pts = grid_points(5, 5, 0.5);
    const auto map = synthetic_map(train_pts, 3, 47, map_hyper(6.0, 1.2, 0.4));
    std::vector<Point> refs;
    for (const auto& [id, p] : g.vertices()) refs.push_back(p);

    PlanResult long_plan;
    long_plan.path = Path{{0, 1, 2, 5, 8, 7, 6, 3, 0}};  // perimeter tour, 16 samples
    PlanResult short_plan;
    short_plan.path = Path{{0}};  // single corner sample

    int wins = 0;
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const auto test_set = synthesize_fingerprints(map, refs, 900 + seed);
        const auto long_report = evaluate_plan_error(long_plan, g, map, refs, test_set, 0.5,
                                                     seed, true, quick_fit());
        const auto short_report = evaluate_plan_error(short_plan, g, map, refs, test_set, 0.5,
                                                      seed, true, quick_fit());
        double total = 0.0;
        for (const auto& row : long_report.rows) total += row.error;
        CHECK(long_report.mean_error ==
              doctest::Approx(total / long_report.rows.size()).epsilon(1e-12));
        if (long_report.mean_error <= short_report.mean_error + 1e-12) ++wins;
    }
    CHECK(wins >= 4);
}

TEST_CASE("dense noiseless evaluation drives the error to zero") {
    const auto g = unit_grid(3, 3);
    const auto train_pts = grid_points(7, 7, 0.5);
    const auto h = map_hyper(8.0, 1.5, 0.1);
    const auto map = synthetic_map(train_pts, 2, 3, h);
    const std::vector<Point> refs{{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}, {2.0, 2.0}};

    // Noiseless test fingerprints: per-AP posterior means at the references.
    SurveyDataset test_set;
    for (const auto& [ap, model] : map.models) {
        const auto post = gp_posterior(model.train_points, model.train_values, refs, model.hyper);
        for (std::size_t i = 0; i < refs.size(); ++i)
            test_set.rows.push_back({refs[i], ap, post.mean(static_cast<Eigen::Index>(i))});
    }

    PlanResult plan;
    plan.path = Path{{0, 1, 2, 5, 8, 7, 6, 3, 0}};
    const auto report =
        evaluate_plan_error(plan, g, map, refs, test_set, 0.25, 12, true, quick_fit());
    CHECK(report.mean_error == doctest::Approx(0.0));
}

TEST_CASE("pearson correlation closed forms") {
    CHECK(pearson_correlation({1, 2, 3, 4}, {8, 6, 4, 2}) == doctest::Approx(-1.0));
    CHECK(pearson_correlation({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(pearson_correlation({1, 2, 3}, {5, 5, 5}), ValidationError);
    CHECK_THROWS_AS(pearson_correlation({1.0}, {2.0}), ValidationError);
}

TEST_CASE("utility_error_correlation validates its inputs") {
    const auto g = unit_grid(2, 2);
    UtilityContext ctx;
    ctx.vertex_points = g.unique_vertex_points();
    ctx.hyper = map_hyper();
    const auto map = synthetic_map(grid_points(2, 2, 1.0), 1, 1, map_hyper());
    SurveyDataset test_set = synthesize_fingerprints(map, {{0.5, 0.5}}, 1);
    std::vector<Path> too_few(4, Path{{0, 1}});
    CHECK_THROWS_AS(utility_error_correlation(too_few, g, ctx, map, {{0, 0}}, test_set, 0.5, 1),
                    ValidationError);
}

TEST_CASE("make_reference_grid respects spacing and edge distance") {
    const auto g = unit_grid(3, 3);  // bounding box [0,2] x [0,2]
    const auto full = make_reference_grid(g, 1.0, 10.0);
    CHECK(full.size() == 9);
    const auto near = make_reference_grid(g, 0.5, 0.1);
    for (const Point& p : near) {
        double best = 1e9;
        for (const Edge& e : g.edges())
            best = std::min(best, point_segment_distance(p, g.point(e.u), g.point(e.v)));
        CHECK(best <= 0.1);
    }
    CHECK(near.size() == 21);  // the 4 cell centers sit 0.5 m from every edge

    // A single-corridor graph keeps only points near the corridor.
    AreaGraph corridor({{0, {0, 0}}, {1, {4, 0}}}, {{0, 1, 4.0}});
    const auto slim = make_reference_grid(corridor, 1.0, 0.25);
    CHECK(slim.size() == 5);
    for (const Point& p : slim) CHECK(p.y == doctest::Approx(0.0));
}

TEST_CASE("LocalizationReport JSON shape") {
    LocalizationReport report;
    report.rows = {{{0, 0}, {1, 0}, 1.0}, {{2, 2}, {2, 2}, 0.0}};
    report.mean_error = 0.5;
    const std::string j = to_json_string(report);
    CHECK(j.find("\"mean_error\":0.5") != std::string::npos);
    CHECK(j.find("\"points\"") != std::string::npos);
    CHECK(j.find("\"true\":[0.0,0.0]") != std::string::npos);
    CHECK(j.find("\"pred\":[1.0,0.0]") != std::string::npos);
}
