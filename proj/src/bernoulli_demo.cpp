#include "powerborrow/bernoulli_demo.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <string>

#include "powerborrow/error.hpp"

namespace powerborrow::bernoulli {

namespace {

void check_args(double theta, double delta, const BernoulliHistory& hist) {
    hist.validate();
    if (!(theta > 0.0 && theta < 1.0)) {
        throw Error(ErrorCode::DomainError, "theta must lie in (0, 1), got " + std::to_string(theta));
    }
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw Error(ErrorCode::DomainError, "delta must lie in [0, 1], got " + std::to_string(delta));
    }
}

double log_theta_kernel(double theta, double shape1, double shape2) {
    return (shape1 - 1.0) * std::log(theta) + (shape2 - 1.0) * std::log1p(-theta);
}

}  // namespace

void BernoulliHistory::validate() const {
    if (n0 < 1 || y0 < 0 || y0 > n0) throw Error(ErrorCode::DomainError, "need 0 <= y0 <= n0 and n0 >= 1");
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw Error(ErrorCode::InvalidHyperparameter, "Beta shapes must be positive");
}

double log_beta(double a, double b) {
    return boost::math::lgamma(a) + boost::math::lgamma(b) - boost::math::lgamma(a + b);
}

double log_binomial_coefficient(long n0, long y0) {
    return boost::math::lgamma(static_cast<double>(n0) + 1.0) - boost::math::lgamma(static_cast<double>(y0) + 1.0) -
           boost::math::lgamma(static_cast<double>(n0 - y0) + 1.0);
}

double npp_log_density(double theta, double delta, const BernoulliHistory& hist, double log_c0) {
    check_args(theta, delta, hist);
    const double s1 = delta * static_cast<double>(hist.y0) + hist.a1;
    const double s2 = delta * static_cast<double>(hist.n0 - hist.y0) + hist.a2;
    // Numerator: c0^delta L^delta pi0(theta); denominator: C(delta) = c0^delta B(s1, s2) / B(a1, a2).
    const double numerator = delta * log_c0 + log_theta_kernel(theta, s1, s2) - log_beta(hist.a1, hist.a2);
    const double log_c = delta * log_c0 + log_beta(s1, s2) - log_beta(hist.a1, hist.a2);
    return numerator - log_c;
}

double jpp_log_kernel(double theta, double delta, const BernoulliHistory& hist, double log_c0) {
    check_args(theta, delta, hist);
    const double s1 = delta * static_cast<double>(hist.y0) + hist.a1;
    const double s2 = delta * static_cast<double>(hist.n0 - hist.y0) + hist.a2;
    return delta * log_c0 + log_theta_kernel(theta, s1, s2);
}

}  // namespace powerborrow::bernoulli
