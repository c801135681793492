#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <random>

#include "powerborrow/power_posterior.hpp"

namespace pbtest {

using powerborrow::Matrix;
using powerborrow::Vector;

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline powerborrow::Dataset random_dataset(long n, const Vector& beta, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto p = beta.size();
    powerborrow::Dataset d{Matrix(n, p), Vector(n)};
    for (long i = 0; i < n; ++i) {
        d.x(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < p; ++j) d.x(i, j) = u(rng);
    }
    for (long i = 0; i < n; ++i) d.y[i] = d.x.row(i).dot(beta) + sigma * z(rng);
    return d;
}

inline Matrix random_spd(Eigen::Index p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix a(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) a(i, j) = z(rng);
    return a * a.transpose() + static_cast<double>(p) * Matrix::Identity(p, p);
}

inline double eigen_logdet(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    return es.eigenvalues().array().log().sum();
}

// Explicit-inverse evaluation of the closed-form symbols, no factorizations shared with the library.
struct Rederived {
    double nu0, nu, h0, h, log_c, log_m;
    Vector beta_tilde, beta_star;
    Matrix lambda0, lambda;
};

inline Rederived rederive(double delta, const powerborrow::PriorSpec& prior, const powerborrow::GaussianSuffStats& s0,
                          const powerborrow::GaussianSuffStats& s) {
    const double p = static_cast<double>(s.p);
    const auto pp = static_cast<Eigen::Index>(s.p);
    const double k = prior.k;
    const Matrix r = prior.k == 1 ? prior.r : Matrix::Zero(pp, pp);
    const Vector mu0 = prior.k == 1 ? prior.mu0 : Vector::Zero(pp);
    Rederived o;
    o.nu0 = (static_cast<double>(s0.n) * delta - p) / 2.0 + prior.t - 1.0;
    o.nu = o.nu0 + static_cast<double>(s.n) / 2.0;
    o.lambda0 = delta * s0.xtx + k * r;
    o.lambda = s.xtx + o.lambda0;
    const Matrix l0inv = o.lambda0.inverse();
    const Matrix linv = o.lambda.inverse();
    o.beta_tilde = l0inv * (delta * s0.xty + k * r * mu0);
    o.beta_star = linv * (s.xty + delta * s0.xty + k * r * mu0);
    const Vector d = mu0 - s0.beta_hat;
    const double quad0 = k * d.dot(s0.xtx * l0inv * r * d);
    o.h0 = prior.b + delta * (s0.s + quad0) / 2.0;
    const Vector e = o.beta_tilde - s.beta_hat;
    o.h = o.h0 + (s.s + e.dot(s.xtx * linv * o.lambda0 * e)) / 2.0;
    const double ld0 = std::log(o.lambda0.determinant());
    const double ld = std::log(o.lambda.determinant());
    o.log_c = -(static_cast<double>(s0.n) * delta - p) / 2.0 * std::log(2.0 * M_PI) + std::lgamma(o.nu0) - 0.5 * ld0 -
              o.nu0 * std::log(o.h0);
    o.log_m = -static_cast<double>(s.n) / 2.0 * std::log(2.0 * M_PI) + std::lgamma(o.nu) - std::lgamma(o.nu0) +
              0.5 * ld0 - 0.5 * ld + o.nu0 * std::log(o.h0) - o.nu * std::log(o.h);
    return o;
}

inline powerborrow::Dataset stack(const powerborrow::Dataset& a, const powerborrow::Dataset& b) {
    powerborrow::Dataset out{Matrix(a.x.rows() + b.x.rows(), a.x.cols()), Vector(a.y.size() + b.y.size())};
    out.x << a.x, b.x;
    out.y << a.y, b.y;
    return out;
}

}  // namespace pbtest
