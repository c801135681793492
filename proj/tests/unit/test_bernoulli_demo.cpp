#include "doctest.h"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>

#include "powerborrow/bernoulli_demo.hpp"
#include "powerborrow/error.hpp"

using namespace powerborrow;
using namespace powerborrow::bernoulli;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

double beta_log_pdf(double theta, double a, double b) {
    return std::log(boost::math::pdf(boost::math::beta_distribution<double>(a, b), theta));
}

}  // namespace

TEST_CASE("endpoint cases reduce to Beta densities") {
    const BernoulliHistory h{3, 10, 1.0, 1.0};
    const BernoulliHistory g{7, 20, 2.5, 0.7};
    for (double theta : {0.05, 0.3, 0.5, 0.81, 0.97}) {
        CHECK(npp_log_density(theta, 0.0, h, 0.0) == doctest::Approx(beta_log_pdf(theta, 1.0, 1.0)).epsilon(1e-12));
        CHECK(npp_log_density(theta, 0.0, g, 0.0) == doctest::Approx(beta_log_pdf(theta, 2.5, 0.7)).epsilon(1e-12));
        CHECK(npp_log_density(theta, 1.0, h, 0.0) == doctest::Approx(beta_log_pdf(theta, 4.0, 8.0)).epsilon(1e-12));
        CHECK(npp_log_density(theta, 0.5, g, 0.0) ==
              doctest::Approx(beta_log_pdf(theta, 2.5 + 3.5, 0.7 + 6.5)).epsilon(1e-12));
    }
}

TEST_CASE("normalized density ignores the likelihood scale") {
    const BernoulliHistory h{7, 20, 1.0, 1.0};
    for (int i = 1; i <= 51; ++i) {
        const double theta = i / 52.0;
        for (int j = 0; j < 51; ++j) {
            const double delta = j / 50.0;
            const double base = npp_log_density(theta, delta, h, 0.0);
            for (double lc : {-50.0, 50.0}) {
                CHECK(std::abs(npp_log_density(theta, delta, h, lc) - base) < 1e-12 * std::max(1.0, std::abs(base)));
            }
        }
    }
}

TEST_CASE("joint kernel carries the likelihood scale") {
    const BernoulliHistory h{7, 20, 1.0, 1.0};
    for (double theta : {0.1, 0.4, 0.75}) {
        for (double delta : {0.0, 0.25, 0.6, 1.0}) {
            for (double lc : {-50.0, 3.0, 50.0}) {
                const double shift = jpp_log_kernel(theta, delta, h, lc) - jpp_log_kernel(theta, delta, h, 0.0);
                CHECK(shift == doctest::Approx(delta * lc).epsilon(1e-12));
            }
        }
        const double d1 = 0.8, d2 = 0.3, lc = 50.0;
        const double cross = (jpp_log_kernel(theta, d1, h, lc) - jpp_log_kernel(theta, d2, h, lc)) -
                             (jpp_log_kernel(theta, d1, h, 0.0) - jpp_log_kernel(theta, d2, h, 0.0));
        CHECK(cross == doctest::Approx((d1 - d2) * lc).epsilon(1e-12));
    }
}

TEST_CASE("binomial likelihood scale") {
    CHECK(std::exp(log_binomial_coefficient(20, 7)) == doctest::Approx(77520.0).epsilon(1e-12));
    CHECK(log_binomial_coefficient(5, 0) == doctest::Approx(0.0));
    const BernoulliHistory h{7, 20, 1.0, 1.0};
    const double lc = log_binomial_coefficient(20, 7);
    for (double theta : {0.2, 0.4, 0.9}) {
        for (double delta : {0.1, 0.5, 1.0}) {
            const double direct =
                delta * (std::log(77520.0) + 7.0 * std::log(theta) + 13.0 * std::log(1.0 - theta));
            CHECK(jpp_log_kernel(theta, delta, h, lc) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("conditional density integrates to one in theta") {
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (const BernoulliHistory& h : {BernoulliHistory{7, 20, 1.0, 1.0}, BernoulliHistory{0, 5, 0.5, 2.0},
                                      BernoulliHistory{12, 12, 3.0, 0.6}}) {
        for (double delta : {0.0, 0.37, 1.0}) {
            const double mass =
                integrator.integrate([&](double t) { return std::exp(npp_log_density(t, delta, h, 17.0)); }, 0.0, 1.0);
            CHECK(std::abs(mass - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("domain errors") {
    const BernoulliHistory h{7, 20, 1.0, 1.0};
    CHECK(code_of([&] { npp_log_density(0.0, 0.5, h, 0.0); }) == ErrorCode::DomainError);
    CHECK(code_of([&] { npp_log_density(1.0, 0.5, h, 0.0); }) == ErrorCode::DomainError);
    CHECK(code_of([&] { jpp_log_kernel(0.5, -0.1, h, 0.0); }) == ErrorCode::DomainError);
    CHECK(code_of([&] { jpp_log_kernel(0.5, 1.1, h, 0.0); }) == ErrorCode::DomainError);
    CHECK(code_of([] { npp_log_density(0.5, 0.5, BernoulliHistory{21, 20, 1.0, 1.0}, 0.0); }) ==
          ErrorCode::DomainError);
    CHECK(code_of([] { npp_log_density(0.5, 0.5, BernoulliHistory{1, 20, 0.0, 1.0}, 0.0); }) ==
          ErrorCode::InvalidHyperparameter);
}
