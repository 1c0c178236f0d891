#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipp/geometry.hpp"

namespace ipp {

// Parameters of one exponential-kernel GP field (one per access point).
struct Hyperparameters {
    double sigma_f = 1.0;       // signal standard deviation, dBm
    double length_scale = 1.0;  // meters
    double sigma_n = 0.1;       // observation noise standard deviation, dBm
    double mean_const = 0.0;    // constant mean function, dBm

    void validate() const;  // throws ValidationError
};

std::string to_json_string(const Hyperparameters& h);
Hyperparameters hyperparameters_from_json(const std::string& json_text);

// Everything needed to score a set of sample locations: the vertex field y_V,
// the pilot locations conditioned on alongside the samples, and the kernel.
struct UtilityContext {
    std::vector<Point> vertex_points;  // the set V (exact duplicates dropped)
    std::vector<Point> pilot_points;   // locations of the pilot data D
    Hyperparameters hyper;
    double jitter = 1e-8;  // relative diagonal boost, scaled by sigma_f^2
};

// k(p,q) = sigma_f^2 * exp(-|p-q| / length_scale)
double kernel_eval(const Point& p, const Point& q, const Hyperparameters& h);

// Entry (i,j) = kernel_eval(a[i], b[j], h).
Eigen::MatrixXd cov_matrix(const std::vector<Point>& a, const std::vector<Point>& b,
                           const Hyperparameters& h);

struct Posterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// Exact GP regression with noise sigma_n^2 on the training diagonal.
// jitter scales with sigma_f^2 and escalates x10 on Cholesky failure
// up to 1e-2 before giving up with NumericalError.
Posterior gp_posterior(const std::vector<Point>& train, const std::vector<double>& y,
                       const std::vector<Point>& test, const Hyperparameters& h,
                       double jitter = 1e-8);

// Differential entropy of N(mu, cov) in nats: 0.5*ln|cov| + d/2*(1 + ln 2pi).
double gaussian_entropy(const Eigen::MatrixXd& cov);

// MI between the vertex field y_V and noisy observations at
// sample_points ++ pilot_points:  H(y_V) - H(y_V | y_R, D).
double mi_gain(const UtilityContext& ctx, const std::vector<Point>& sample_points);

// f_D(P): the planning objective. Identical to mi_gain; named for its role.
double path_utility(const UtilityContext& ctx, const std::vector<Point>& sample_points);

double log_marginal_likelihood(const std::vector<Point>& train, const std::vector<double>& y,
                               const Hyperparameters& h);

struct FitOptions {
    int starts = 6;           // multi-start count, first start is the init
    int max_iterations = 200; // Nelder-Mead iterations per start
    uint64_t seed = 0;
    double length_scale_min = 0.1, length_scale_max = 100.0;  // meters
    double sigma_min = 1e-3, sigma_max = 1e3;                 // dBm, for sigma_f and sigma_n
};

// Maximizes log_marginal_likelihood over (sigma_f, length_scale, sigma_n) in
// log space; mean_const is pinned to the empirical mean of y. The returned
// parameters never score below the (clamped) init.
Hyperparameters fit_hyperparameters(const std::vector<Point>& train, const std::vector<double>& y,
                                    const Hyperparameters& init, const FitOptions& opts = {});

}  // namespace ipp
