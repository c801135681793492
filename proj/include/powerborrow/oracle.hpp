#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "powerborrow/power_posterior.hpp"

namespace powerborrow::oracle {

// Brute-force ground truth for the closed forms. Quadrature is restricted to p = 1.
struct QuadratureConfig {
    double beta_halfwidth = 12.0;           // in conditional standard deviations
    double log_sigma2_lo = -12.0;           // offsets around log(S0 / n0)
    double log_sigma2_hi = 12.0;
    long points_per_axis = 2048;            // trapezoidal on (beta, log sigma2)
    double target_rel_err = 1e-7;
    int max_range_doublings = 10;

    void validate() const;
};

struct QuadratureResult {
    bool divergent = false;
    bool converged = false;
    double log_value = 0.0;
    int range_doublings = 0;
    double resolution_change = 0.0;  // |log I(2N) - log I(N)| on the final range
};

// log C(delta) = log ∫∫ pi0(beta, sigma2) L(beta, sigma2 | D0)^delta dbeta dsigma2.
QuadratureResult c_delta_quadrature(double delta, const PriorSpec& prior, const GaussianSuffStats& stats0,
                                    const QuadratureConfig& cfg = {});

// log m(delta | D0, D) as the ratio of two quadratures. Throws Divergent if either integral diverges.
double marginal_lik_quadrature(double delta, const PowerPosteriorContext& ctx, const QuadratureConfig& cfg = {});

struct MonteCarloDic {
    double dic_estimate = 0.0;
    double p_d_estimate = 0.0;
    double expected_deviance = 0.0;
    double deviance_at_mean = 0.0;
    double std_error = 0.0;       // of dic_estimate
    double p_d_std_error = 0.0;
};

// DIC = 2 E[Dev] - Dev(posterior mean), n log(2 pi) omitted; jackknife standard errors.
MonteCarloDic dic_monte_carlo(double delta, const PowerPosteriorContext& ctx, long n_draws, std::uint64_t seed);

// One conjugate update treating the stacked data as a single likelihood (explicit inverses).
NIGPosterior pooled_conjugate_posterior(const PriorSpec& prior, const GaussianSuffStats& stats_pooled);

// Built-in p = 1 instances for the quadrature cross-checks.
struct QuadratureCase {
    std::string name;
    PriorSpec prior;
    GaussianSuffStats stats0;
    GaussianSuffStats stats;
    double delta = 0.0;
};

std::vector<QuadratureCase> proper_quadrature_suite();
std::vector<QuadratureCase> improper_quadrature_suite();

struct CheckResult {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct OracleCheckOptions {
    std::string case_name = "all";  // all | proper | improper | pooled | dic
    long dic_draws = 100000;
    std::uint64_t seed = 20240101;
};

std::vector<CheckResult> run_oracle_checks(const OracleCheckOptions& options);

}  // namespace powerborrow::oracle
