#include "ipp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "ipp/errors.hpp"
#include "rand_util.hpp"

namespace ipp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kJitterCeiling = 1e-2;  // relative to sigma_f^2

void require(bool ok, const char* msg) {
    if (!ok) throw ValidationError(msg);
}

// Cholesky with the escalating-jitter policy: the matrix handed in must
// already contain jitter_start*sigma_f2 on its diagonal; on failure the
// diagonal boost grows x10 until the ceiling.
Eigen::LLT<Eigen::MatrixXd> cholesky_with_escalation(Eigen::MatrixXd m, double sigma_f2,
                                                     double jitter_start) {
    double applied = jitter_start;
    while (true) {
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) return llt;
        double next = (applied <= 0.0) ? 1e-8 : applied * 10.0;
        if (next > kJitterCeiling) {
            throw NumericalError("Cholesky failed after jitter escalation to " +
                                 std::to_string(applied) + " * sigma_f^2");
        }
        m.diagonal().array() += (next - applied) * sigma_f2;
        applied = next;
    }
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

void Hyperparameters::validate() const {
    require(std::isfinite(sigma_f) && sigma_f > 0.0, "sigma_f must be positive");
    require(std::isfinite(length_scale) && length_scale > 0.0, "length_scale must be positive");
    require(std::isfinite(sigma_n) && sigma_n >= 0.0, "sigma_n must be non-negative");
    require(std::isfinite(mean_const), "mean_const must be finite");
}

std::string to_json_string(const Hyperparameters& h) {
    nlohmann::json j;
    j["sigma_f"] = h.sigma_f;
    j["length_scale"] = h.length_scale;
    j["sigma_n"] = h.sigma_n;
    j["mean_const"] = h.mean_const;
    return j.dump();
}

Hyperparameters hyperparameters_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    Hyperparameters h;
    try {
        h.sigma_f = j.at("sigma_f").get<double>();
        h.length_scale = j.at("length_scale").get<double>();
        h.sigma_n = j.at("sigma_n").get<double>();
        h.mean_const = j.at("mean_const").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad hyperparameters JSON: ") + e.what());
    }
    h.validate();
    return h;
}

double kernel_eval(const Point& p, const Point& q, const Hyperparameters& h) {
    return h.sigma_f * h.sigma_f * std::exp(-distance(p, q) / h.length_scale);
}

Eigen::MatrixXd cov_matrix(const std::vector<Point>& a, const std::vector<Point>& b,
                           const Hyperparameters& h) {
    require(!a.empty() && !b.empty(), "cov_matrix: empty point list");
    Eigen::MatrixXd k(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                kernel_eval(a[i], b[j], h);
    return k;
}

Posterior gp_posterior(const std::vector<Point>& train, const std::vector<double>& y,
                       const std::vector<Point>& test, const Hyperparameters& h,
                       double jitter) {
    h.validate();
    require(!train.empty() && train.size() == y.size(), "gp_posterior: |train| must equal |y| > 0");
    require(!test.empty(), "gp_posterior: empty test set");

    const double sigma_f2 = h.sigma_f * h.sigma_f;
    Eigen::MatrixXd k_tt = cov_matrix(train, train, h);
    k_tt.diagonal().array() += h.sigma_n * h.sigma_n + jitter * sigma_f2;
    const auto llt = cholesky_with_escalation(std::move(k_tt), sigma_f2, jitter);

    Eigen::VectorXd residual(train.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        residual(static_cast<Eigen::Index>(i)) = y[i] - h.mean_const;

    const Eigen::MatrixXd k_ts = cov_matrix(train, test, h);  // |train| x |test|
    Posterior post;
    post.mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(test.size()), h.mean_const) +
                k_ts.transpose() * llt.solve(residual);
    // Sigma* = K(s,s) - K(s,t) (K(t,t)+sigma_n^2 I)^-1 K(t,s), via L^-1 K(t,s)
    const Eigen::MatrixXd w = llt.matrixL().solve(k_ts);
    post.cov = cov_matrix(test, test, h) - w.transpose() * w;
    return post;
}

double gaussian_entropy(const Eigen::MatrixXd& cov) {
    require(cov.rows() == cov.cols() && cov.rows() > 0, "gaussian_entropy: square matrix required");
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
            "gaussian_entropy: matrix not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw NumericalError("gaussian_entropy: covariance not positive definite");
    const double d = static_cast<double>(cov.rows());
    return 0.5 * log_det_from_llt(llt) + 0.5 * d * (1.0 + kLog2Pi);
}

double mi_gain(const UtilityContext& ctx, const std::vector<Point>& sample_points) {
    ctx.hyper.validate();
    require(!ctx.vertex_points.empty(), "mi_gain: vertex set V is empty");
    require(ctx.jitter >= 0.0, "mi_gain: negative jitter");

    std::vector<Point> cond = sample_points;
    cond.insert(cond.end(), ctx.pilot_points.begin(), ctx.pilot_points.end());
    if (cond.empty()) return 0.0;

    const Hyperparameters& h = ctx.hyper;
    const double sigma_f2 = h.sigma_f * h.sigma_f;
    const Eigen::MatrixXd k_vv = cov_matrix(ctx.vertex_points, ctx.vertex_points, h);
    const Eigen::MatrixXd k_cv = cov_matrix(cond, ctx.vertex_points, h);
    const Eigen::MatrixXd k_cc = cov_matrix(cond, cond, h);

    // Prior and posterior must share one jitter level or MI can go negative,
    // so on a Cholesky failure the whole computation retries escalated.
    double jitter = (ctx.jitter > 0.0) ? ctx.jitter : 1e-12;
    while (true) {
        try {
            Eigen::MatrixXd prior = k_vv;
            prior.diagonal().array() += jitter * sigma_f2;
            Eigen::LLT<Eigen::MatrixXd> prior_llt(prior);
            if (prior_llt.info() != Eigen::Success)
                throw NumericalError("mi_gain: prior covariance not positive definite");

            Eigen::MatrixXd cond_cov = k_cc;
            cond_cov.diagonal().array() += h.sigma_n * h.sigma_n + jitter * sigma_f2;
            Eigen::LLT<Eigen::MatrixXd> cond_llt(cond_cov);
            if (cond_llt.info() != Eigen::Success)
                throw NumericalError("mi_gain: conditioning covariance not positive definite");

            const Eigen::MatrixXd w = cond_llt.matrixL().solve(k_cv);
            Eigen::MatrixXd post = prior - w.transpose() * w;
            Eigen::LLT<Eigen::MatrixXd> post_llt(post);
            if (post_llt.info() != Eigen::Success)
                throw NumericalError("mi_gain: posterior covariance not positive definite");

            return 0.5 * (log_det_from_llt(prior_llt) - log_det_from_llt(post_llt));
        } catch (const NumericalError&) {
            if (jitter * 10.0 > kJitterCeiling) throw;
            jitter *= 10.0;
        }
    }
}

double path_utility(const UtilityContext& ctx, const std::vector<Point>& sample_points) {
    return mi_gain(ctx, sample_points);
}

double log_marginal_likelihood(const std::vector<Point>& train, const std::vector<double>& y,
                               const Hyperparameters& h) {
    h.validate();
    require(train.size() == y.size() && !train.empty(), "log_marginal_likelihood: size mismatch");

    const double sigma_f2 = h.sigma_f * h.sigma_f;
    Eigen::MatrixXd m = cov_matrix(train, train, h);
    m.diagonal().array() += h.sigma_n * h.sigma_n + 1e-8 * sigma_f2;
    const auto llt = cholesky_with_escalation(std::move(m), sigma_f2, 1e-8);

    Eigen::VectorXd residual(train.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        residual(static_cast<Eigen::Index>(i)) = y[i] - h.mean_const;

    const double n = static_cast<double>(train.size());
    return -0.5 * residual.dot(llt.solve(residual)) - 0.5 * log_det_from_llt(llt) -
           0.5 * n * kLog2Pi;
}

namespace {

struct LogBox {
    double lo[3];
    double hi[3];
};

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

// Objective in x = (log sigma_f, log length_scale, log sigma_n); -inf outside
// the box or on numerical failure.
double fit_objective(const Eigen::Vector3d& x, const LogBox& box, const std::vector<Point>& train,
                     const std::vector<double>& y, double mean_const) {
    for (int i = 0; i < 3; ++i)
        if (x[i] < box.lo[i] || x[i] > box.hi[i]) return -std::numeric_limits<double>::infinity();
    Hyperparameters h;
    h.sigma_f = std::exp(x[0]);
    h.length_scale = std::exp(x[1]);
    h.sigma_n = std::exp(x[2]);
    h.mean_const = mean_const;
    try {
        return log_marginal_likelihood(train, y, h);
    } catch (const NumericalError&) {
        return -std::numeric_limits<double>::infinity();
    }
}

// Plain Nelder-Mead maximization; returns the best vertex seen.
std::pair<Eigen::Vector3d, double> nelder_mead(
    const Eigen::Vector3d& x0, int max_iter,
    const std::function<double(const Eigen::Vector3d&)>& f) {
    constexpr int n = 3;
    std::vector<Eigen::Vector3d> simplex(n + 1, x0);
    for (int i = 0; i < n; ++i) simplex[i + 1][i] += 0.4;
    std::vector<double> val(n + 1);
    for (int i = 0; i <= n; ++i) val[i] = f(simplex[i]);

    auto order = [&] {
        std::vector<int> idx(n + 1);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return val[a] > val[b]; });
        std::vector<Eigen::Vector3d> s2(n + 1);
        std::vector<double> v2(n + 1);
        for (int i = 0; i <= n; ++i) {
            s2[i] = simplex[idx[i]];
            v2[i] = val[idx[i]];
        }
        simplex = std::move(s2);
        val = std::move(v2);
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        order();
        if (std::isfinite(val[0]) && std::isfinite(val[n]) && val[0] - val[n] < 1e-10) break;

        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        for (int i = 0; i < n; ++i) centroid += simplex[i];
        centroid /= n;

        const Eigen::Vector3d reflected = centroid + (centroid - simplex[n]);
        const double fr = f(reflected);
        if (fr > val[0]) {
            const Eigen::Vector3d expanded = centroid + 2.0 * (centroid - simplex[n]);
            const double fe = f(expanded);
            if (fe > fr) {
                simplex[n] = expanded;
                val[n] = fe;
            } else {
                simplex[n] = reflected;
                val[n] = fr;
            }
        } else if (fr > val[n - 1]) {
            simplex[n] = reflected;
            val[n] = fr;
        } else {
            const Eigen::Vector3d contracted = centroid + 0.5 * (simplex[n] - centroid);
            const double fc = f(contracted);
            if (fc > val[n]) {
                simplex[n] = contracted;
                val[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
                    val[i] = f(simplex[i]);
                }
            }
        }
    }
    order();
    return {simplex[0], val[0]};
}

}  // namespace

Hyperparameters fit_hyperparameters(const std::vector<Point>& train, const std::vector<double>& y,
                                    const Hyperparameters& init, const FitOptions& opts) {
    require(train.size() == y.size(), "fit_hyperparameters: size mismatch");
    require(train.size() >= 5, "fit_hyperparameters: need at least 5 observations");
    require(opts.starts >= 1, "fit_hyperparameters: starts must be >= 1");

    const double mean_const =
        std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

    double var = 0.0;
    for (double v : y) var += (v - mean_const) * (v - mean_const);
    const double sd = std::max(1e-3, std::sqrt(var / static_cast<double>(y.size())));

    double min_x = train[0].x, max_x = train[0].x, min_y = train[0].y, max_y = train[0].y;
    for (const Point& p : train) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double extent = std::max(0.2, std::hypot(max_x - min_x, max_y - min_y));

    LogBox box;
    box.lo[0] = std::log(opts.sigma_min);
    box.hi[0] = std::log(opts.sigma_max);
    box.lo[1] = std::log(opts.length_scale_min);
    box.hi[1] = std::log(opts.length_scale_max);
    box.lo[2] = std::log(opts.sigma_min);
    box.hi[2] = std::log(opts.sigma_max);

    auto objective = [&](const Eigen::Vector3d& x) {
        return fit_objective(x, box, train, y, mean_const);
    };

    Eigen::Vector3d init_x(std::log(clamp(init.sigma_f, opts.sigma_min, opts.sigma_max)),
                           std::log(clamp(init.length_scale, opts.length_scale_min,
                                          opts.length_scale_max)),
                           std::log(clamp(std::max(init.sigma_n, opts.sigma_min), opts.sigma_min,
                                          opts.sigma_max)));
    const double init_value = objective(init_x);

    std::mt19937_64 rng(opts.seed);
    Eigen::Vector3d best_x = init_x;
    double best_value = init_value;
    bool any_finite = std::isfinite(init_value);

    for (int s = 0; s < opts.starts; ++s) {
        Eigen::Vector3d x0;
        if (s == 0) {
            x0 = init_x;
        } else {
            x0[0] = clamp(std::log(sd) + detail::uniform_in(rng, -1.5, 1.5), box.lo[0], box.hi[0]);
            x0[1] = clamp(std::log(extent) + detail::uniform_in(rng, -3.0, 0.0), box.lo[1],
                          box.hi[1]);
            x0[2] = clamp(std::log(sd) + detail::uniform_in(rng, -4.0, -0.5), box.lo[2], box.hi[2]);
        }
        auto [x, value] = nelder_mead(x0, opts.max_iterations, objective);
        if (std::isfinite(value)) any_finite = true;
        if (value > best_value) {
            best_value = value;
            best_x = x;
        }
    }
    if (!any_finite) throw NumericalError("fit_hyperparameters: every start failed numerically");

    Hyperparameters out;
    out.sigma_f = std::exp(best_x[0]);
    out.length_scale = std::exp(best_x[1]);
    out.sigma_n = std::exp(best_x[2]);
    out.mean_const = mean_const;
    return out;
}

}  // namespace ipp
