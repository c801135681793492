#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "powerborrow/model_core.hpp"
#include "powerborrow/prior_family.hpp"

namespace powerborrow {

// Binds the initial prior to the historical (D0) and current (D) data.
struct PowerPosteriorContext {
    PriorSpec prior;
    GaussianSuffStats stats0;
    GaussianSuffStats stats;
    FeasibleSet feasible;

    long p() const { return stats.p; }
};

PowerPosteriorContext make_context(PriorSpec prior, GaussianSuffStats stats0, GaussianSuffStats stats);

// Every intermediate quantity of the closed forms at a given delta.
struct NIGCoefficients {
    double nu0 = 0.0;  // (n0 delta - p)/2 + t - 1
    double nu = 0.0;   // nu0 + n/2
    Vector beta_tilde;
    Vector beta_star;
    Matrix lambda0;  // delta X0'X0 + k R
    Matrix lambda;   // X'X + lambda0
    double h0 = 0.0;
    double h = 0.0;
};

// N_p-InvGamma(location, precision, shape, scale):
//   sigma2 ~ InvGamma(shape, scale), beta | sigma2 ~ N(location, sigma2 * precision^{-1}).
struct NIGPosterior {
    Vector location;
    Matrix precision;
    double shape = 0.0;
    double scale = 0.0;

    bool is_proper() const;
};

struct PosteriorMoments {
    Vector mean_beta;
    double mean_sigma2 = 0.0;
    Matrix cov_beta;
};

struct PosteriorDraws {
    Matrix beta;    // one draw per row
    Vector sigma2;
};

struct DicResult {
    double dic = 0.0;
    double p_d = 0.0;
    // Deviance at the posterior mean, without the n log(2 pi) constant.
    double deviance_at_mean = 0.0;
};

using LogDeltaPrior = std::function<double(double)>;

inline double uniform_log_delta_prior(double) { return 0.0; }

// Tabulated curve over delta.
struct DeltaProfile {
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<bool> feasible_mask;
    double selected = 0.0;
    double selected_value = 0.0;
};

NIGCoefficients nig_coefficients(double delta, const PowerPosteriorContext& ctx);

// log of C(delta) = ∫ pi0(theta) L(theta | D0)^delta dtheta, (2 pi) powers included.
double log_c(double delta, const PriorSpec& prior, const GaussianSuffStats& stats0);

// Exact log m(delta | D0, D) = log ∫ L(theta | D) pi(theta | D0, delta) dtheta.
double log_marginal_likelihood(double delta, const PowerPosteriorContext& ctx);

NIGPosterior posterior(double delta, const PowerPosteriorContext& ctx);

PosteriorMoments posterior_moments(const NIGPosterior& post);

PosteriorDraws sample_posterior(const NIGPosterior& post, long n_draws, std::uint64_t seed);

// DIC and p_D, both without the additive n log(2 pi).
DicResult dic(double delta, const PowerPosteriorContext& ctx);

// Deviance -2 log L(beta, sigma2 | D) with n log(2 pi) dropped.
double deviance(const Vector& beta, double sigma2, const GaussianSuffStats& stats);

// Unnormalized log pi(delta | D0, D) under the normalized power prior; -inf off the feasible set.
double delta_log_posterior(double delta, const PowerPosteriorContext& ctx,
                           const LogDeltaPrior& log_prior_delta = uniform_log_delta_prior);

struct DeltaPosterior {
    DeltaProfile profile;  // values hold the normalized density
    double mean = 0.0;
    double mode = 0.0;
    double log_normalizer = 0.0;
    PowerPosteriorContext ctx;
    LogDeltaPrior log_prior_delta;

    // Normalized density at any delta; exactly zero off the feasible set.
    double density(double delta) const;
};

DeltaPosterior normalize_delta_posterior(const PowerPosteriorContext& ctx,
                                         const LogDeltaPrior& log_prior_delta, long grid_size);

}  // namespace powerborrow
