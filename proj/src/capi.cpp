#include "powerborrow/powerborrow.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <sstream>
#include <string>

#include "json.hpp"
#include "powerborrow/bernoulli_demo.hpp"
#include "powerborrow/delta_selection.hpp"
#include "powerborrow/oracle.hpp"
#include "powerborrow/sim_harness.hpp"

using namespace powerborrow;

struct pb_stats {
    GaussianSuffStats value;
};

struct pb_prior {
    PriorSpec value;
};

struct pb_context {
    PowerPosteriorContext value;
};

struct pb_profile {
    DeltaProfile value;
};

struct pb_sim_result {
    sim::SimResult value;
};

namespace {

thread_local std::string g_last_error;

pb_status to_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::ShapeMismatch: return PB_ERR_SHAPE_MISMATCH;
        case ErrorCode::SingularDesign: return PB_ERR_SINGULAR_DESIGN;
        case ErrorCode::NotPositiveDefinite: return PB_ERR_NOT_POSITIVE_DEFINITE;
        case ErrorCode::InvalidSummary: return PB_ERR_INVALID_SUMMARY;
        case ErrorCode::InvalidHyperparameter: return PB_ERR_INVALID_HYPERPARAMETER;
        case ErrorCode::InsufficientHistoricalData: return PB_ERR_INSUFFICIENT_HISTORICAL_DATA;
        case ErrorCode::SingularSystem: return PB_ERR_SINGULAR_SYSTEM;
        case ErrorCode::OutsideFeasibleSet: return PB_ERR_OUTSIDE_FEASIBLE_SET;
        case ErrorCode::NonpositiveScale: return PB_ERR_NONPOSITIVE_SCALE;
        case ErrorCode::ImproperPosterior: return PB_ERR_IMPROPER_POSTERIOR;
        case ErrorCode::MomentUndefined: return PB_ERR_MOMENT_UNDEFINED;
        case ErrorCode::EmptyDomain: return PB_ERR_EMPTY_DOMAIN;
        case ErrorCode::UnsupportedDimension: return PB_ERR_UNSUPPORTED_DIMENSION;
        case ErrorCode::Divergent: return PB_ERR_DIVERGENT;
        case ErrorCode::DomainError: return PB_ERR_DOMAIN;
        case ErrorCode::InvalidArgument: return PB_ERR_INVALID_ARGUMENT;
        case ErrorCode::IoError: return PB_ERR_IO;
        case ErrorCode::ParseError: return PB_ERR_PARSE;
    }
    return PB_ERR_INTERNAL;
}

template <typename F>
pb_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return PB_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return PB_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PB_ERR_INTERNAL;
    }
}

template <typename T>
void require(const T* ptr, const char* what) {
    if (ptr == nullptr) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

Vector copy_vector(const double* data, size_t p) { return Eigen::Map<const Vector>(data, static_cast<Eigen::Index>(p)); }

Matrix copy_matrix(const double* data, size_t rows, size_t cols) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMajor>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void write_matrix(const Matrix& m, double* out) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

void write_vector(const Vector& v, double* out) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i];
}

char* dup_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

LogDeltaPrior wrap_log_prior(pb_log_delta_prior_fn fn, void* user) {
    if (fn == nullptr) return uniform_log_delta_prior;
    return [fn, user](double delta) { return fn(delta, user); };
}

Criterion to_criterion(pb_criterion c) {
    if (c == PB_CRITERION_MARGINAL_LIKELIHOOD) return Criterion::MarginalLikelihood;
    if (c == PB_CRITERION_DIC) return Criterion::Dic;
    throw Error(ErrorCode::InvalidArgument, "unknown criterion");
}

void fill_feasible(const FeasibleSet& fs, pb_feasible_set* out) {
    out->lower = fs.lower;
    out->lower_open = fs.lower_open ? 1 : 0;
    out->upper = fs.upper;
    out->upper_open = fs.upper_open ? 1 : 0;
    out->includes_zero = fs.includes_zero ? 1 : 0;
}

std::vector<sim::Method> parse_methods(const char* text) {
    if (text == nullptr || *text == '\0') return {sim::Method::EB1, sim::Method::EB2, sim::Method::DIC};
    std::vector<sim::Method> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(sim::parse_method(item));
    }
    return out;
}

}  // namespace

extern "C" {

const char* pb_version(void) { return "1.0.0"; }

const char* pb_status_name(pb_status status) {
    switch (status) {
        case PB_OK: return "Ok";
        case PB_ERR_SHAPE_MISMATCH: return "ShapeMismatch";
        case PB_ERR_SINGULAR_DESIGN: return "SingularDesign";
        case PB_ERR_NOT_POSITIVE_DEFINITE: return "NotPositiveDefinite";
        case PB_ERR_INVALID_SUMMARY: return "InvalidSummary";
        case PB_ERR_INVALID_HYPERPARAMETER: return "InvalidHyperparameter";
        case PB_ERR_INSUFFICIENT_HISTORICAL_DATA: return "InsufficientHistoricalData";
        case PB_ERR_SINGULAR_SYSTEM: return "SingularSystem";
        case PB_ERR_OUTSIDE_FEASIBLE_SET: return "OutsideFeasibleSet";
        case PB_ERR_NONPOSITIVE_SCALE: return "NonpositiveScale";
        case PB_ERR_IMPROPER_POSTERIOR: return "ImproperPosterior";
        case PB_ERR_MOMENT_UNDEFINED: return "MomentUndefined";
        case PB_ERR_EMPTY_DOMAIN: return "EmptyDomain";
        case PB_ERR_UNSUPPORTED_DIMENSION: return "UnsupportedDimension";
        case PB_ERR_DIVERGENT: return "Divergent";
        case PB_ERR_DOMAIN: return "DomainError";
        case PB_ERR_INVALID_ARGUMENT: return "InvalidArgument";
        case PB_ERR_IO: return "IoError";
        case PB_ERR_PARSE: return "ParseError";
        case PB_ERR_INTERNAL: return "Internal";
    }
    return "Unknown";
}

const char* pb_last_error_message(void) { return g_last_error.c_str(); }

void pb_string_free(char* s) { std::free(s); }

pb_status pb_stats_from_data(const double* x, size_t n, size_t p, const double* y, pb_stats** out) {
    return guarded([&] {
        require(x, "x");
        require(y, "y");
        require(out, "out");
        Dataset data{copy_matrix(x, n, p), copy_vector(y, n)};
        *out = new pb_stats{sufficient_stats(data)};
    });
}

pb_status pb_stats_from_summary(long n, double ybar, double sd, pb_stats** out) {
    return guarded([&] {
        require(out, "out");
        *out = new pb_stats{stats_from_summary(n, ybar, sd)};
    });
}

pb_status pb_stats_read_csv(const char* path, pb_stats** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new pb_stats{sufficient_stats(read_dataset_csv(path))};
    });
}

void pb_stats_free(pb_stats* stats) { delete stats; }

size_t pb_stats_n(const pb_stats* stats) { return stats ? static_cast<size_t>(stats->value.n) : 0; }

size_t pb_stats_p(const pb_stats* stats) { return stats ? static_cast<size_t>(stats->value.p) : 0; }

pb_status pb_stats_get(const pb_stats* stats, double* beta_hat, double* s, double* xtx, double* xty) {
    return guarded([&] {
        require(stats, "stats");
        if (beta_hat) write_vector(stats->value.beta_hat, beta_hat);
        if (s) *s = stats->value.s;
        if (xtx) write_matrix(stats->value.xtx, xtx);
        if (xty) write_vector(stats->value.xty, xty);
    });
}

pb_status pb_chol_logdet(const double* m, size_t dim, double* out) {
    return guarded([&] {
        require(m, "m");
        require(out, "out");
        *out = chol_logdet(copy_matrix(m, dim, dim));
    });
}

pb_status pb_prior_reference(size_t p, pb_prior** out) {
    return guarded([&] {
        require(out, "out");
        *out = new pb_prior{make_reference_prior(static_cast<long>(p))};
    });
}

pb_status pb_prior_zellner(double g, const pb_stats* xtx_source, const double* mu0, pb_prior** out) {
    return guarded([&] {
        require(xtx_source, "xtx_source");
        require(out, "out");
        const auto p = static_cast<size_t>(xtx_source->value.p);
        const Vector m = mu0 ? copy_vector(mu0, p) : Vector::Zero(static_cast<Eigen::Index>(p));
        *out = new pb_prior{make_zellner_g_prior(g, xtx_source->value.xtx, m)};
    });
}

pb_status pb_prior_nig(size_t p, const double* mu0, const double* r, double a, double b, pb_prior** out) {
    return guarded([&] {
        require(mu0, "mu0");
        require(r, "r");
        require(out, "out");
        *out = new pb_prior{make_nig_prior(copy_vector(mu0, p), copy_matrix(r, p, p), a, b)};
    });
}

pb_status pb_prior_custom(size_t p, double t, double b, int k, const double* mu0, const double* r, pb_prior** out) {
    return guarded([&] {
        require(out, "out");
        const auto dim = static_cast<Eigen::Index>(p);
        const Vector m = mu0 ? copy_vector(mu0, p) : Vector::Zero(dim);
        const Matrix rm = r ? copy_matrix(r, p, p) : Matrix::Identity(dim, dim);
        auto prior = make_custom_prior(t, b, k, m, rm);
        validate_prior(prior, static_cast<long>(p));
        *out = new pb_prior{std::move(prior)};
    });
}

pb_status pb_prior_from_json(const char* json, size_t p, const pb_stats* historical, const pb_stats* current,
                             pb_prior** out) {
    return guarded([&] {
        require(json, "json");
        require(out, "out");
        *out = new pb_prior{prior_from_json(json, static_cast<long>(p), historical ? &historical->value : nullptr,
                                            current ? &current->value : nullptr)};
    });
}

pb_status pb_prior_set_normalized(pb_prior* prior, int normalized) {
    return guarded([&] {
        require(prior, "prior");
        auto updated = prior->value;
        updated.normalized_initial_prior = normalized != 0;
        if (updated.normalized_initial_prior) validate_prior(updated, updated.dim());
        prior->value = std::move(updated);
    });
}

pb_status pb_prior_params(const pb_prior* prior, double* t, double* b, int* k) {
    return guarded([&] {
        require(prior, "prior");
        if (t) *t = prior->value.t;
        if (b) *b = prior->value.b;
        if (k) *k = prior->value.k;
    });
}

const char* pb_prior_label(const pb_prior* prior) { return prior ? prior->value.label.c_str() : ""; }

void pb_prior_free(pb_prior* prior) { delete prior; }

pb_status pb_feasible_set_compute(const pb_prior* prior, long n0, long p, pb_feasible_set* out) {
    return guarded([&] {
        require(prior, "prior");
        require(out, "out");
        fill_feasible(feasible_set(prior->value, n0, p), out);
    });
}

int pb_feasible_set_contains(const pb_feasible_set* set, double delta) {
    if (set == nullptr) return 0;
    FeasibleSet fs;
    fs.lower = set->lower;
    fs.lower_open = set->lower_open != 0;
    fs.upper = set->upper;
    fs.upper_open = set->upper_open != 0;
    fs.includes_zero = set->includes_zero != 0;
    return fs.contains(delta) ? 1 : 0;
}

pb_status pb_context_create(const pb_prior* prior, const pb_stats* historical, const pb_stats* current,
                            pb_context** out) {
    return guarded([&] {
        require(prior, "prior");
        require(historical, "historical");
        require(current, "current");
        require(out, "out");
        *out = new pb_context{make_context(prior->value, historical->value, current->value)};
    });
}

void pb_context_free(pb_context* ctx) { delete ctx; }

size_t pb_context_p(const pb_context* ctx) { return ctx ? static_cast<size_t>(ctx->value.p()) : 0; }

pb_status pb_context_feasible_set(const pb_context* ctx, pb_feasible_set* out) {
    return guarded([&] {
        require(ctx, "ctx");
        require(out, "out");
        fill_feasible(ctx->value.feasible, out);
    });
}

pb_status pb_log_c(const pb_prior* prior, const pb_stats* historical, double delta, double* out) {
    return guarded([&] {
        require(prior, "prior");
        require(historical, "historical");
        require(out, "out");
        *out = log_c(delta, prior->value, historical->value);
    });
}

pb_status pb_log_marginal_likelihood(const pb_context* ctx, double delta, double* out) {
    return guarded([&] {
        require(ctx, "ctx");
        require(out, "out");
        *out = log_marginal_likelihood(delta, ctx->value);
    });
}

pb_status pb_nig_coefficients(const pb_context* ctx, double delta, double* nu0, double* nu, double* h0, double* h,
                              double* beta_tilde, double* beta_star) {
    return guarded([&] {
        require(ctx, "ctx");
        const auto c = nig_coefficients(delta, ctx->value);
        if (nu0) *nu0 = c.nu0;
        if (nu) *nu = c.nu;
        if (h0) *h0 = c.h0;
        if (h) *h = c.h;
        if (beta_tilde) write_vector(c.beta_tilde, beta_tilde);
        if (beta_star) write_vector(c.beta_star, beta_star);
    });
}

pb_status pb_posterior(const pb_context* ctx, double delta, double* location, double* precision, double* shape,
                       double* scale) {
    return guarded([&] {
        require(ctx, "ctx");
        const auto post = posterior(delta, ctx->value);
        if (location) write_vector(post.location, location);
        if (precision) write_matrix(post.precision, precision);
        if (shape) *shape = post.shape;
        if (scale) *scale = post.scale;
    });
}

pb_status pb_posterior_moments(const pb_context* ctx, double delta, double* mean_beta, double* mean_sigma2,
                               double* cov_beta) {
    return guarded([&] {
        require(ctx, "ctx");
        const auto m = posterior_moments(posterior(delta, ctx->value));
        if (mean_beta) write_vector(m.mean_beta, mean_beta);
        if (mean_sigma2) *mean_sigma2 = m.mean_sigma2;
        if (cov_beta) write_matrix(m.cov_beta, cov_beta);
    });
}

pb_status pb_sample_posterior(const pb_context* ctx, double delta, size_t n_draws, uint64_t seed, double* beta,
                              double* sigma2) {
    return guarded([&] {
        require(ctx, "ctx");
        require(beta, "beta");
        require(sigma2, "sigma2");
        const auto draws = sample_posterior(posterior(delta, ctx->value), static_cast<long>(n_draws), seed);
        write_matrix(draws.beta, beta);
        write_vector(draws.sigma2, sigma2);
    });
}

pb_status pb_dic(const pb_context* ctx, double delta, double* dic_out, double* p_d) {
    return guarded([&] {
        require(ctx, "ctx");
        const auto r = dic(delta, ctx->value);
        if (dic_out) *dic_out = r.dic;
        if (p_d) *p_d = r.p_d;
    });
}

pb_status pb_delta_log_posterior(const pb_context* ctx, double delta, pb_log_delta_prior_fn log_prior, void* user,
                                 double* out) {
    return guarded([&] {
        require(ctx, "ctx");
        require(out, "out");
        *out = delta_log_posterior(delta, ctx->value, wrap_log_prior(log_prior, user));
    });
}

pb_status pb_select_delta(const pb_context* ctx, pb_criterion criterion, long grid_size, double tol,
                          pb_profile** out) {
    return guarded([&] {
        require(ctx, "ctx");
        require(out, "out");
        *out = new pb_profile{select_delta(to_criterion(criterion), ctx->value, grid_size, tol)};
    });
}

pb_status pb_profile_curve(const pb_context* ctx, pb_criterion criterion, long grid_size, pb_profile** out) {
    return guarded([&] {
        require(ctx, "ctx");
        require(out, "out");
        *out = new pb_profile{profile_curve(to_criterion(criterion), ctx->value, grid_size)};
    });
}

pb_status pb_delta_posterior(const pb_context* ctx, pb_log_delta_prior_fn log_prior, void* user, long grid_size,
                             pb_profile** out, double* mean) {
    return guarded([&] {
        require(ctx, "ctx");
        require(out, "out");
        auto dp = normalize_delta_posterior(ctx->value, wrap_log_prior(log_prior, user), grid_size);
        if (mean) *mean = dp.mean;
        *out = new pb_profile{std::move(dp.profile)};
    });
}

size_t pb_profile_size(const pb_profile* profile) { return profile ? profile->value.grid.size() : 0; }

pb_status pb_profile_point(const pb_profile* profile, size_t i, double* delta, double* value, int* feasible) {
    return guarded([&] {
        require(profile, "profile");
        if (i >= profile->value.grid.size()) throw Error(ErrorCode::InvalidArgument, "profile index out of range");
        if (delta) *delta = profile->value.grid[i];
        if (value) *value = profile->value.values[i];
        if (feasible) *feasible = profile->value.feasible_mask[i] ? 1 : 0;
    });
}

double pb_profile_selected(const pb_profile* profile) {
    return profile ? profile->value.selected : std::numeric_limits<double>::quiet_NaN();
}

double pb_profile_selected_value(const pb_profile* profile) {
    return profile ? profile->value.selected_value : std::numeric_limits<double>::quiet_NaN();
}

void pb_profile_free(pb_profile* profile) { delete profile; }

pb_status pb_bernoulli_npp_log_density(double theta, double delta, long y0, long n0, double a1, double a2,
                                       double log_c0, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = bernoulli::npp_log_density(theta, delta, {y0, n0, a1, a2}, log_c0);
    });
}

pb_status pb_bernoulli_jpp_log_kernel(double theta, double delta, long y0, long n0, double a1, double a2,
                                      double log_c0, double* out) {
    return guarded([&] {
        require(out, "out");
        *out = bernoulli::jpp_log_kernel(theta, delta, {y0, n0, a1, a2}, log_c0);
    });
}

double pb_log_binomial_coefficient(long n0, long y0) {
    if (n0 < 0 || y0 < 0 || y0 > n0) return std::numeric_limits<double>::quiet_NaN();
    return bernoulli::log_binomial_coefficient(n0, y0);
}

void pb_fig1_config_default(pb_fig1_config* cfg) {
    if (cfg == nullptr) return;
    const sim::Fig1Config d;
    cfg->n = d.n;
    cfg->n0 = d.n0;
    cfg->s = d.s;
    cfg->s0 = d.s0;
    cfg->ybar = d.ybar;
    cfg->discrepancy_grid = nullptr;
    cfg->grid_len = 0;
    cfg->methods = nullptr;
    cfg->select_grid_size = d.grid_size;
    cfg->tol = d.tol;
}

void pb_fig2_config_default(pb_fig2_config* cfg) {
    if (cfg == nullptr) return;
    const sim::Fig2Config d;
    cfg->beta_current = nullptr;
    cfg->p = 0;
    cfg->beta04_grid = nullptr;
    cfg->grid_len = 0;
    cfg->n = d.n;
    cfg->n0 = d.n0;
    cfg->sigma = d.sigma;
    cfg->replicates = d.replicates;
    cfg->seed = d.seed;
    cfg->methods = nullptr;
    cfg->select_grid_size = d.grid_size;
    cfg->tol = d.tol;
    cfg->workers = d.workers;
    cfg->common_random_numbers = d.common_random_numbers ? 1 : 0;
}

pb_status pb_simulate_fig1(const pb_fig1_config* cfg, pb_sim_result** out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        sim::Fig1Config c;
        c.n = cfg->n;
        c.n0 = cfg->n0;
        c.s = cfg->s;
        c.s0 = cfg->s0;
        c.ybar = cfg->ybar;
        if (cfg->discrepancy_grid) c.discrepancy_grid.assign(cfg->discrepancy_grid, cfg->discrepancy_grid + cfg->grid_len);
        c.methods = parse_methods(cfg->methods);
        c.grid_size = cfg->select_grid_size;
        c.tol = cfg->tol;
        *out = new pb_sim_result{sim::run_fig1(c)};
    });
}

pb_status pb_simulate_fig2(const pb_fig2_config* cfg, pb_sim_result** out) {
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        sim::Fig2Config c;
        if (cfg->beta_current) c.beta_current.assign(cfg->beta_current, cfg->beta_current + cfg->p);
        if (cfg->beta04_grid) c.beta04_grid.assign(cfg->beta04_grid, cfg->beta04_grid + cfg->grid_len);
        c.n = cfg->n;
        c.n0 = cfg->n0;
        c.sigma = cfg->sigma;
        c.replicates = cfg->replicates;
        c.seed = cfg->seed;
        c.methods = parse_methods(cfg->methods);
        c.grid_size = cfg->select_grid_size;
        c.tol = cfg->tol;
        c.workers = cfg->workers;
        c.common_random_numbers = cfg->common_random_numbers != 0;
        *out = new pb_sim_result{sim::run_fig2(c)};
    });
}

size_t pb_sim_result_size(const pb_sim_result* result) { return result ? result->value.records.size() : 0; }

pb_status pb_sim_result_record(const pb_sim_result* result, size_t i, pb_sim_record* out) {
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        if (i >= result->value.records.size()) throw Error(ErrorCode::InvalidArgument, "record index out of range");
        const auto& r = result->value.records[i];
        out->cell = r.cell;
        std::snprintf(out->method, sizeof out->method, "%s", sim::method_name(r.method));
        out->mean_delta = r.mean_delta;
        out->log_mse = r.log_mse;
        out->replicates = r.replicates;
        out->failures = r.failures;
        out->elapsed_seconds = r.elapsed_seconds;
    });
}

const char* pb_sim_result_config_hash(const pb_sim_result* result) {
    return result ? result->value.config_hash.c_str() : "";
}

pb_status pb_sim_result_csv(const pb_sim_result* result, char** out) {
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        *out = dup_string(sim::to_csv(result->value));
    });
}

pb_status pb_sim_result_json(const pb_sim_result* result, char** out) {
    return guarded([&] {
        require(result, "result");
        require(out, "out");
        *out = dup_string(sim::to_json(result->value));
    });
}

void pb_sim_result_free(pb_sim_result* result) { delete result; }

pb_status pb_oracle_check(const char* case_name, long dic_draws, uint64_t seed, char** report_json, int* all_passed) {
    return guarded([&] {
        require(report_json, "report_json");
        oracle::OracleCheckOptions opts;
        if (case_name) opts.case_name = case_name;
        if (dic_draws > 0) opts.dic_draws = dic_draws;
        opts.seed = seed;
        const auto checks = oracle::run_oracle_checks(opts);
        nlohmann::json report = nlohmann::json::array();
        bool ok = true;
        for (const auto& c : checks) {
            ok = ok && c.passed;
            nlohmann::json row;
            row["name"] = c.name;
            row["passed"] = c.passed;
            row["observed"] = std::isfinite(c.observed) ? nlohmann::json(c.observed) : nlohmann::json(nullptr);
            row["tolerance"] = c.tolerance;
            row["detail"] = c.detail;
            report.push_back(row);
        }
        if (all_passed) *all_passed = ok ? 1 : 0;
        *report_json = dup_string(report.dump());
    });
}

}  // extern "C"
