#include "powerborrow/power_posterior.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace powerborrow {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_delta_range(double delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw Error(ErrorCode::DomainError, "delta must lie in [0, 1], got " + std::to_string(delta));
    }
}

// Historical half of the closed forms: lambda0, beta_tilde, nu0, H0.
struct HistoricalPart {
    Matrix lambda0;
    Vector rhs0;  // delta X0'Y0 + k R mu0
    Vector beta_tilde;
    double nu0 = 0.0;
    double h0 = 0.0;
    bool degenerate = false;  // delta = 0 with k = 0: lambda0 = 0, beta_tilde undefined
};

HistoricalPart historical_part(double delta, const PriorSpec& prior, const GaussianSuffStats& stats0) {
    const long p = stats0.p;
    HistoricalPart part;
    part.nu0 = 0.5 * (static_cast<double>(stats0.n) * delta - static_cast<double>(p)) + prior.t - 1.0;
    part.lambda0 = delta * stats0.xtx;
    part.rhs0 = delta * stats0.xty;
    if (prior.k == 1) {
        part.lambda0 += prior.r;
        part.rhs0 += prior.r * prior.mu0;
    }
    if (delta == 0.0 && prior.k == 0) {
        part.degenerate = true;
        part.beta_tilde = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
        part.h0 = prior.b;
        return part;
    }
    const SpdFactor f0(part.lambda0);
    part.beta_tilde = f0.solve(part.rhs0);
    double q0 = 0.0;
    if (prior.k == 1) {
        const Vector d = prior.mu0 - stats0.beta_hat;
        q0 = d.dot(stats0.xtx * f0.solve(Vector(prior.r * d)));
    }
    part.h0 = prior.b + 0.5 * delta * (stats0.s + q0);
    return part;
}

NIGCoefficients coefficients_impl(double delta, const PowerPosteriorContext& ctx) {
    check_delta_range(delta);
    const auto hist = historical_part(delta, ctx.prior, ctx.stats0);
    NIGCoefficients c;
    c.nu0 = hist.nu0;
    c.nu = hist.nu0 + 0.5 * static_cast<double>(ctx.stats.n);
    c.beta_tilde = hist.beta_tilde;
    c.lambda0 = hist.lambda0;
    c.lambda = ctx.stats.xtx + hist.lambda0;
    c.h0 = hist.h0;
    const SpdFactor f(c.lambda);
    c.beta_star = f.solve(Vector(ctx.stats.xty + hist.rhs0));
    double q1 = 0.0;
    if (!hist.degenerate) {
        const Vector e = hist.beta_tilde - ctx.stats.beta_hat;
        q1 = e.dot(ctx.stats.xtx * f.solve(Vector(hist.lambda0 * e)));
    }
    c.h = c.h0 + 0.5 * (ctx.stats.s + q1);
    return c;
}

}  // namespace

PowerPosteriorContext make_context(PriorSpec prior, GaussianSuffStats stats0, GaussianSuffStats stats) {
    if (stats0.p != stats.p) {
        throw Error(ErrorCode::ShapeMismatch, "historical p=" + std::to_string(stats0.p) +
                                                  " differs from current p=" + std::to_string(stats.p));
    }
    validate_prior(prior, stats.p);
    PowerPosteriorContext ctx;
    ctx.feasible = feasible_set(prior, stats0.n, stats0.p);
    ctx.prior = std::move(prior);
    ctx.stats0 = std::move(stats0);
    ctx.stats = std::move(stats);
    return ctx;
}

bool NIGPosterior::is_proper() const {
    if (!(shape > 0.0) || !(scale > 0.0)) return false;
    try {
        SpdFactor check(precision);
    } catch (const Error&) {
        return false;
    }
    return true;
}

NIGCoefficients nig_coefficients(double delta, const PowerPosteriorContext& ctx) {
    if (delta == 0.0 && ctx.prior.k == 0) {
        throw Error(ErrorCode::SingularSystem, "delta = 0 with k = 0 leaves beta_tilde undefined");
    }
    return coefficients_impl(delta, ctx);
}

double log_c(double delta, const PriorSpec& prior, const GaussianSuffStats& stats0) {
    const long p = stats0.p;
    validate_prior(prior, p);
    check_delta_range(delta);
    const auto fs = feasible_set(prior, stats0.n, p);
    if (!fs.contains(delta)) {
        throw Error(ErrorCode::OutsideFeasibleSet,
                    "C(delta) is infinite at delta=" + std::to_string(delta) + " (feasible lower bound " +
                        std::to_string(fs.lower) + ")");
    }
    const auto hist = historical_part(delta, prior, stats0);
    if (!(hist.nu0 > 0.0)) throw Error(ErrorCode::OutsideFeasibleSet, "nu0 <= 0");
    if (!(hist.h0 > 0.0)) throw Error(ErrorCode::NonpositiveScale, "H0(delta) <= 0");
    const double n0 = static_cast<double>(stats0.n);
    double value = -0.5 * (n0 * delta - static_cast<double>(p)) * kLogTwoPi + boost::math::lgamma(hist.nu0) -
                   0.5 * chol_logdet(hist.lambda0) - hist.nu0 * std::log(hist.h0);
    if (prior.normalized_initial_prior) value += prior.log_normalizer(p);
    return value;
}

double log_marginal_likelihood(double delta, const PowerPosteriorContext& ctx) {
    check_delta_range(delta);
    if (!ctx.feasible.contains(delta)) {
        throw Error(ErrorCode::OutsideFeasibleSet, "delta=" + std::to_string(delta) + " is outside the feasible set");
    }
    const auto c = coefficients_impl(delta, ctx);
    if (!(c.nu0 > 0.0)) throw Error(ErrorCode::OutsideFeasibleSet, "nu0 <= 0");
    if (!(c.h0 > 0.0) || !(c.h > 0.0)) throw Error(ErrorCode::NonpositiveScale, "H0(delta) or H(delta) <= 0");
    const double n = static_cast<double>(ctx.stats.n);
    return -0.5 * n * kLogTwoPi + boost::math::lgamma(c.nu) - boost::math::lgamma(c.nu0) +
           0.5 * chol_logdet(c.lambda0) - 0.5 * chol_logdet(c.lambda) + c.nu0 * std::log(c.h0) -
           c.nu * std::log(c.h);
}

NIGPosterior posterior(double delta, const PowerPosteriorContext& ctx) {
    const auto c = coefficients_impl(delta, ctx);
    NIGPosterior post;
    post.location = c.beta_star;
    post.precision = c.lambda;
    post.shape = c.nu;
    post.scale = c.h;
    if (!(post.shape > 0.0) || !(post.scale > 0.0)) {
        throw Error(ErrorCode::ImproperPosterior, "posterior shape " + std::to_string(post.shape) + ", scale " +
                                                       std::to_string(post.scale));
    }
    return post;
}

PosteriorMoments posterior_moments(const NIGPosterior& post) {
    if (!(post.shape > 1.0)) {
        throw Error(ErrorCode::MomentUndefined, "E[sigma2] needs shape > 1, got " + std::to_string(post.shape));
    }
    PosteriorMoments m;
    m.mean_beta = post.location;
    m.mean_sigma2 = post.scale / (post.shape - 1.0);
    const SpdFactor f(post.precision);
    m.cov_beta = m.mean_sigma2 * f.solve(Matrix(Matrix::Identity(post.precision.rows(), post.precision.cols())));
    return m;
}

PosteriorDraws sample_posterior(const NIGPosterior& post, long n_draws, std::uint64_t seed) {
    if (!post.is_proper()) throw Error(ErrorCode::ImproperPosterior, "cannot sample an improper posterior");
    if (n_draws < 1) throw Error(ErrorCode::InvalidArgument, "n_draws must be positive");
    const auto p = post.location.size();
    const Matrix upper = SpdFactor(post.precision).lower().transpose();
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> gamma(post.shape, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    PosteriorDraws draws;
    draws.beta.resize(n_draws, p);
    draws.sigma2.resize(n_draws);
    Vector z(p);
    for (long i = 0; i < n_draws; ++i) {
        const double sigma2 = post.scale / gamma(rng);
        for (Eigen::Index j = 0; j < p; ++j) z[j] = normal(rng);
        // L' w = z gives cov(w) = Lambda^{-1}
        const Vector w = upper.triangularView<Eigen::Upper>().solve(z);
        draws.sigma2[i] = sigma2;
        draws.beta.row(i) = (post.location + std::sqrt(sigma2) * w).transpose();
    }
    return draws;
}

double deviance(const Vector& beta, double sigma2, const GaussianSuffStats& stats) {
    const Vector d = beta - stats.beta_hat;
    const double rss = stats.s + d.dot(stats.xtx * d);
    return static_cast<double>(stats.n) * std::log(sigma2) + rss / sigma2;
}

DicResult dic(double delta, const PowerPosteriorContext& ctx) {
    const auto post = posterior(delta, ctx);
    if (!(post.shape > 1.0)) {
        throw Error(ErrorCode::MomentUndefined, "DIC needs posterior shape > 1, got " + std::to_string(post.shape));
    }
    const double nu = post.shape;
    const double h = post.scale;
    const double n = static_cast<double>(ctx.stats.n);
    const SpdFactor f(post.precision);
    const Vector d = post.location - ctx.stats.beta_hat;
    const double q = d.dot(ctx.stats.xtx * d) + ctx.stats.s;
    const double trace = f.solve(ctx.stats.xtx).trace();
    const double psi = boost::math::digamma(nu);
    const double log_nu1 = std::log(nu - 1.0);

    DicResult out;
    out.dic = n * (log_nu1 + std::log(h) - 2.0 * psi) + (nu + 1.0) / h * q + 2.0 * trace;
    out.p_d = n * (log_nu1 - psi) + q / h + trace;
    out.deviance_at_mean = n * (std::log(h) - log_nu1) + (nu - 1.0) / h * q;
    return out;
}

double delta_log_posterior(double delta, const PowerPosteriorContext& ctx, const LogDeltaPrior& log_prior_delta) {
    if (!ctx.feasible.contains(delta)) return kNegInf;
    return log_marginal_likelihood(delta, ctx) + log_prior_delta(delta);
}

double DeltaPosterior::density(double delta) const {
    const double lp = delta_log_posterior(delta, ctx, log_prior_delta);
    if (lp == kNegInf) return 0.0;
    return std::exp(lp - log_normalizer);
}

DeltaPosterior normalize_delta_posterior(const PowerPosteriorContext& ctx, const LogDeltaPrior& log_prior_delta,
                                         long grid_size) {
    if (grid_size < 64) throw Error(ErrorCode::InvalidArgument, "grid_size must be at least 64");
    const double lo = ctx.feasible.lower;
    const double hi = ctx.feasible.upper;

    DeltaPosterior out;
    out.ctx = ctx;
    out.log_prior_delta = log_prior_delta;
    auto& prof = out.profile;
    prof.grid.resize(grid_size);
    prof.values.assign(grid_size, 0.0);
    prof.feasible_mask.assign(grid_size, false);

    std::vector<double> logv(grid_size, kNegInf);
    double best = kNegInf;
    for (long i = 0; i < grid_size; ++i) {
        const double delta = i + 1 == grid_size ? hi : lo + (hi - lo) * static_cast<double>(i) / (grid_size - 1);
        prof.grid[i] = delta;
        logv[i] = delta_log_posterior(delta, ctx, log_prior_delta);
        prof.feasible_mask[i] = logv[i] != kNegInf;
        best = std::max(best, logv[i]);
    }
    if (best == kNegInf || !std::isfinite(best)) {
        throw Error(ErrorCode::EmptyDomain, "delta posterior has no finite value on the grid");
    }

    // Adaptive Gauss-Kronrod for the normalizer and mean; the grid only tabulates.
    using boost::math::quadrature::gauss_kronrod;
    const auto weight = [&](double delta) {
        const double lp = delta_log_posterior(delta, ctx, log_prior_delta);
        return lp == kNegInf ? 0.0 : std::exp(lp - best);
    };
    const double z = gauss_kronrod<double, 61>::integrate(weight, lo, hi, 20, 1e-12);
    const double first_moment =
        gauss_kronrod<double, 61>::integrate([&](double delta) { return delta * weight(delta); }, lo, hi, 20, 1e-12);
    if (!(z > 0.0) || !std::isfinite(z)) throw Error(ErrorCode::EmptyDomain, "delta posterior normalizer is not finite");
    out.log_normalizer = best + std::log(z);
    out.mean = first_moment / z;

    std::vector<double> w(grid_size);
    for (long i = 0; i < grid_size; ++i) w[i] = prof.feasible_mask[i] ? std::exp(logv[i] - best) : 0.0;

    long arg = -1;
    for (long i = 0; i < grid_size; ++i) {
        prof.values[i] = w[i] / z;
        if (prof.feasible_mask[i] && (arg < 0 || prof.values[i] > prof.values[arg])) arg = i;
    }
    out.mode = prof.grid[arg];
    prof.selected = out.mode;
    prof.selected_value = prof.values[arg];
    return out;
}

}  // namespace powerborrow
