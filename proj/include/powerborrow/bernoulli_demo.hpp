#pragma once

namespace powerborrow::bernoulli {

// y0 successes in n0 Bernoulli trials with a Beta(a1, a2) initial prior on theta.
struct BernoulliHistory {
    long y0 = 0;
    long n0 = 1;
    double a1 = 1.0;
    double a2 = 1.0;

    void validate() const;
};

// Conditional log-density of theta given delta under the normalized power prior.
// The historical likelihood is scaled by exp(log_c0); the scaling cancels against C(delta).
double npp_log_density(double theta, double delta, const BernoulliHistory& hist, double log_c0);

// Unnormalized log-kernel of the joint power prior, carrying delta * log_c0.
double jpp_log_kernel(double theta, double delta, const BernoulliHistory& hist, double log_c0);

double log_beta(double a, double b);

// log binom(n0, y0): the constant that turns the Bernoulli likelihood into the binomial one.
double log_binomial_coefficient(long n0, long y0);

}  // namespace powerborrow::bernoulli
