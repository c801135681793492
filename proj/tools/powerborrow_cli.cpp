// powerborrow command-line front-end. Links only the C API.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "powerborrow/powerborrow.h"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct Failure {
    int exit_code;
    std::string message;
};

[[noreturn]] void fail(pb_status status) {
    const int code = status == PB_ERR_IO ? kExitIo : kExitValidation;
    const std::string message = pb_last_error_message();
    throw Failure{code, message.empty() ? pb_status_name(status) : message};
}

void check(pb_status status) {
    if (status != PB_OK) fail(status);
}

[[noreturn]] void invalid(const std::string& message) { throw Failure{kExitValidation, message}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using StatsPtr = std::unique_ptr<pb_stats, Deleter<pb_stats, pb_stats_free>>;
using PriorPtr = std::unique_ptr<pb_prior, Deleter<pb_prior, pb_prior_free>>;
using ContextPtr = std::unique_ptr<pb_context, Deleter<pb_context, pb_context_free>>;
using ProfilePtr = std::unique_ptr<pb_profile, Deleter<pb_profile, pb_profile_free>>;
using SimPtr = std::unique_ptr<pb_sim_result, Deleter<pb_sim_result, pb_sim_result_free>>;

struct OwnedString {
    char* s = nullptr;
    ~OwnedString() { pb_string_free(s); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure{kExitIo, "IoError: cannot open '" + path + "'"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure{kExitIo, "IoError: cannot write '" + path + "'"};
    out << text;
    if (!out) throw Failure{kExitIo, "IoError: write failed for '" + path + "'"};
}

// Inline JSON text or a path to a JSON file.
std::string json_argument(const std::string& arg) {
    const auto first = arg.find_first_not_of(" \t\n");
    if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return arg;
    return read_file(arg);
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        invalid("ParseError: " + what + ": " + e.what());
    }
}

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct DataSource {
    std::string path;
    std::string summary;

    bool given() const { return !path.empty() || !summary.empty(); }
};

StatsPtr load_stats(const DataSource& src, const std::string& name) {
    if (!src.path.empty() && !src.summary.empty()) invalid("give either --" + name + " or --" + name + "-summary, not both");
    if (!src.given()) invalid("missing --" + name + " (CSV) or --" + name + "-summary (JSON)");
    pb_stats* raw = nullptr;
    std::string summary_text = src.summary;
    if (summary_text.empty() && src.path.size() > 5 && src.path.substr(src.path.size() - 5) == ".json") {
        summary_text = read_file(src.path);
    }
    if (!summary_text.empty()) {
        const json j = parse_json(json_argument(summary_text), name + " summary");
        if (!j.is_object() || !j.contains("n") || !j.contains("ybar") || !j.contains("sd")) {
            invalid("InvalidSummary: " + name + " summary needs \"n\", \"ybar\" and \"sd\"");
        }
        try {
            check(pb_stats_from_summary(j.at("n").get<long>(), j.at("ybar").get<double>(), j.at("sd").get<double>(), &raw));
        } catch (const json::exception& e) {
            invalid("InvalidSummary: " + std::string(e.what()));
        }
    } else {
        check(pb_stats_read_csv(src.path.c_str(), &raw));
    }
    return StatsPtr(raw);
}

PriorPtr load_prior(const std::string& prior_arg, size_t p, const pb_stats* hist, const pb_stats* cur) {
    pb_prior* raw = nullptr;
    if (prior_arg.empty() || prior_arg == "reference") {
        check(pb_prior_reference(p, &raw));
    } else {
        const std::string text = json_argument(prior_arg);
        check(pb_prior_from_json(text.c_str(), p, hist, cur, &raw));
    }
    return PriorPtr(raw);
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::uint64_t fallback) {
    if (seed) return *seed;
    if (const char* env = std::getenv("POWERBORROW_SEED")) {
        try {
            size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::strlen(env)) return v;
        } catch (const std::exception&) {
        }
        invalid("POWERBORROW_SEED is not an unsigned integer: '" + std::string(env) + "'");
    }
    return fallback;
}

pb_criterion parse_criterion(const std::string& name) {
    if (name == "eb" || name == "marginal" || name == "ml") return PB_CRITERION_MARGINAL_LIKELIHOOD;
    if (name == "dic") return PB_CRITERION_DIC;
    invalid("unknown criterion '" + name + "' (expected eb or dic)");
}

void emit(const std::string& text, const std::string& output) {
    if (output.empty()) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
    } else {
        write_file(output, text.back() == '\n' ? text : text + '\n');
    }
}

std::string profile_csv(const pb_profile* prof, const char* value_name) {
    std::string out = std::string("delta,") + value_name + ",feasible\n";
    for (size_t i = 0; i < pb_profile_size(prof); ++i) {
        double d = 0.0, v = 0.0;
        int f = 0;
        check(pb_profile_point(prof, i, &d, &v, &f));
        out += fmt17(d) + "," + fmt17(v) + "," + std::to_string(f) + "\n";
    }
    return out;
}

json profile_json(const pb_profile* prof) {
    json rows = json::array();
    for (size_t i = 0; i < pb_profile_size(prof); ++i) {
        double d = 0.0, v = 0.0;
        int f = 0;
        check(pb_profile_point(prof, i, &d, &v, &f));
        rows.push_back({{"delta", d}, {"value", number(v)}, {"feasible", f != 0}});
    }
    return rows;
}

json posterior_summary(const pb_context* ctx, double delta) {
    const size_t p = pb_context_p(ctx);
    std::vector<double> loc(p), prec(p * p), mean(p), cov(p * p);
    double shape = 0.0, scale = 0.0;
    check(pb_posterior(ctx, delta, loc.data(), prec.data(), &shape, &scale));
    json out;
    out["beta_star"] = loc;
    out["shape"] = shape;
    out["scale"] = scale;
    double mean_sigma2 = 0.0;
    const pb_status st = pb_posterior_moments(ctx, delta, mean.data(), &mean_sigma2, cov.data());
    if (st == PB_OK) {
        out["mean_sigma2"] = mean_sigma2;
        std::vector<double> diag(p);
        for (size_t i = 0; i < p; ++i) diag[i] = cov[i * p + i];
        out["cov_diag"] = diag;
    } else if (st == PB_ERR_MOMENT_UNDEFINED) {
        out["mean_sigma2"] = nullptr;
        out["cov_diag"] = nullptr;
    } else {
        fail(st);
    }
    return out;
}

json feasible_json(const pb_feasible_set& fs) {
    return {{"lower", fs.lower}, {"lower_open", fs.lower_open != 0}, {"upper", fs.upper},
            {"includes_zero", fs.includes_zero != 0}};
}

struct DataArgs {
    DataSource historical;
    DataSource current;
    std::string prior;

    void attach(CLI::App* cmd) {
        cmd->add_option("--historical", historical.path, "historical data: CSV with a y column, or summary .json");
        cmd->add_option("--historical-summary", historical.summary, "historical summary JSON {\"n\",\"ybar\",\"sd\"}");
        cmd->add_option("--current", current.path, "current data: CSV with a y column, or summary .json");
        cmd->add_option("--current-summary", current.summary, "current summary JSON {\"n\",\"ybar\",\"sd\"}");
        cmd->add_option("--prior", prior, "initial prior: 'reference', inline JSON or JSON file");
    }
};

struct Loaded {
    StatsPtr hist;
    StatsPtr cur;
    PriorPtr prior;
    ContextPtr ctx;
};

Loaded load_context(const DataArgs& args) {
    Loaded l;
    l.hist = load_stats(args.historical, "historical");
    l.cur = load_stats(args.current, "current");
    const size_t p = pb_stats_p(l.cur.get());
    if (pb_stats_p(l.hist.get()) != p) invalid("ShapeMismatch: historical and current data have different p");
    l.prior = load_prior(args.prior, p, l.hist.get(), l.cur.get());
    pb_context* raw = nullptr;
    check(pb_context_create(l.prior.get(), l.hist.get(), l.cur.get(), &raw));
    l.ctx.reset(raw);
    return l;
}

struct LogDeltaBeta {
    double a;
    double b;
};

double beta_log_density(double delta, void* user) {
    const auto* beta = static_cast<const LogDeltaBeta*>(user);
    if (delta <= 0.0 || delta >= 1.0) {
        if ((delta == 0.0 && beta->a == 1.0) || (delta == 1.0 && beta->b == 1.0)) return 0.0;
        return (delta == 0.0 ? beta->a < 1.0 : beta->b < 1.0) ? INFINITY : -INFINITY;
    }
    return (beta->a - 1.0) * std::log(delta) + (beta->b - 1.0) * std::log1p(-delta) -
           (std::lgamma(beta->a) + std::lgamma(beta->b) - std::lgamma(beta->a + beta->b));
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            invalid(what + ": cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) invalid(what + " is empty");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Power-prior analysis of the normal linear model"};
    app.require_subcommand(1);
    app.set_version_flag("--version", pb_version());

    // feasible
    auto* feasible = app.add_subcommand("feasible", "feasible set of the power parameter");
    std::string f_prior;
    long f_n0 = 0, f_p = 1;
    DataSource f_hist, f_cur;
    feasible->add_option("--prior", f_prior, "initial prior: 'reference', inline JSON or JSON file");
    feasible->add_option("--n0", f_n0, "historical sample size");
    feasible->add_option("--p", f_p, "number of regression coefficients");
    feasible->add_option("--historical", f_hist.path, "historical data (sets n0 and p)");
    feasible->add_option("--historical-summary", f_hist.summary, "historical summary JSON (sets n0, p = 1)");
    feasible->add_option("--current", f_cur.path, "current data, used by data-dependent priors");
    feasible->add_option("--current-summary", f_cur.summary, "current summary JSON");

    // select
    auto* select = app.add_subcommand("select", "select delta by marginal likelihood or DIC");
    DataArgs s_data;
    s_data.attach(select);
    std::string s_criterion = "eb", s_profile, s_output;
    long s_grid = 128;
    double s_tol = 1e-7;
    select->add_option("--criterion", s_criterion, "eb | dic")->capture_default_str();
    select->add_option("--grid", s_grid, "scan grid size")->capture_default_str();
    select->add_option("--tol", s_tol, "refinement tolerance")->capture_default_str();
    select->add_option("--profile", s_profile, "write the scan grid to this CSV");
    select->add_option("--output,-o", s_output, "write the report here instead of stdout");

    // profile
    auto* profile = app.add_subcommand("profile", "criterion tabulated over [0, 1]");
    DataArgs p_data;
    p_data.attach(profile);
    std::string p_criterion = "eb", p_format = "csv", p_output;
    long p_grid = 101;
    profile->add_option("--criterion", p_criterion, "eb | dic")->capture_default_str();
    profile->add_option("--grid", p_grid, "grid size")->capture_default_str();
    profile->add_option("--format", p_format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    profile->add_option("--output,-o", p_output, "output path");

    // posterior
    auto* post = app.add_subcommand("posterior", "conjugate posterior at a fixed delta");
    DataArgs q_data;
    q_data.attach(post);
    double q_delta = 1.0;
    long q_draws = 0;
    std::optional<std::uint64_t> q_seed;
    std::string q_draws_out, q_output;
    post->add_option("--delta", q_delta, "power parameter")->required();
    post->add_option("--draws", q_draws, "number of posterior draws to write");
    post->add_option("--seed", q_seed, "RNG seed for draws (falls back to POWERBORROW_SEED)");
    post->add_option("--draws-output", q_draws_out, "CSV path for draws");
    post->add_option("--output,-o", q_output, "output path");

    // delta-posterior
    auto* dpost = app.add_subcommand("delta-posterior", "normalized power prior: posterior of delta");
    DataArgs d_data;
    d_data.attach(dpost);
    long d_grid = 2001;
    std::string d_prior_delta = "uniform", d_format = "json", d_output;
    dpost->add_option("--grid", d_grid, "grid size over the feasible set")->capture_default_str();
    dpost->add_option("--delta-prior", d_prior_delta, "uniform | beta:a,b")->capture_default_str();
    dpost->add_option("--format", d_format, "json | csv")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    dpost->add_option("--output,-o", d_output, "output path");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "simulation studies");
    simulate->require_subcommand(1);
    std::string m_methods, m_csv, m_json;
    simulate->add_option("--methods", m_methods, "comma-separated subset of EB1,EB2,DIC");
    simulate->add_option("--csv", m_csv, "write SimResult CSV here");
    simulate->add_option("--json", m_json, "write SimResult JSON here");
    auto* fig1 = simulate->add_subcommand("fig1", "selected delta against the discrepancy ybar0 - ybar");
    fig1->fallthrough();
    std::string m1_grid;
    long m1_n = 10, m1_n0 = 10, m1_select_grid = 256;
    double m1_s = 0.5, m1_s0 = 0.5, m1_ybar = 0.0;
    fig1->add_option("--n", m1_n)->capture_default_str();
    fig1->add_option("--n0", m1_n0)->capture_default_str();
    fig1->add_option("--s", m1_s)->capture_default_str();
    fig1->add_option("--s0", m1_s0)->capture_default_str();
    fig1->add_option("--ybar", m1_ybar)->capture_default_str();
    fig1->add_option("--grid", m1_grid, "comma-separated discrepancies");
    fig1->add_option("--select-grid", m1_select_grid)->capture_default_str();
    auto* fig2 = simulate->add_subcommand("fig2", "regression study with a shifted historical slope");
    fig2->fallthrough();
    long m2_replicates = 200, m2_n = 20, m2_n0 = 20, m2_select_grid = 64;
    unsigned m2_workers = 1;
    double m2_sigma = 1.0;
    std::optional<std::uint64_t> m2_seed;
    std::string m2_grid;
    fig2->add_option("--replicates", m2_replicates)->capture_default_str();
    fig2->add_option("--seed", m2_seed, "RNG seed (falls back to POWERBORROW_SEED)");
    fig2->add_option("--workers", m2_workers)->capture_default_str();
    fig2->add_option("--sigma", m2_sigma)->capture_default_str();
    fig2->add_option("--n", m2_n)->capture_default_str();
    fig2->add_option("--n0", m2_n0)->capture_default_str();
    fig2->add_option("--grid", m2_grid, "comma-separated historical beta4 values");
    fig2->add_option("--select-grid", m2_select_grid)->capture_default_str();
    bool m2_independent = false;
    fig2->add_flag("--independent-cells", m2_independent, "fresh random streams per cell");

    // oracle-check
    auto* oracle = app.add_subcommand("oracle-check", "closed forms against brute-force oracles");
    std::string o_case = "all";
    double o_draws = 1e5;
    std::optional<std::uint64_t> o_seed;
    oracle->add_option("--case", o_case, "all | proper | improper | pooled | dic")
        ->check(CLI::IsMember({"all", "proper", "improper", "pooled", "dic"}))
        ->capture_default_str();
    oracle->add_option("--dic-draws", o_draws, "Monte Carlo draws for the DIC check")->capture_default_str();
    oracle->add_option("--seed", o_seed, "RNG seed (falls back to POWERBORROW_SEED)");

    // bernoulli-demo
    auto* bern = app.add_subcommand("bernoulli-demo", "joint vs normalized power prior under likelihood scaling");
    long b_y0 = 7, b_n0 = 20;
    double b_a1 = 1.0, b_a2 = 1.0, b_theta = 0.4;
    std::string b_deltas = "0.25,0.5,0.75,1";
    bern->add_option("--y0", b_y0)->capture_default_str();
    bern->add_option("--n0", b_n0)->capture_default_str();
    bern->add_option("--a1", b_a1)->capture_default_str();
    bern->add_option("--a2", b_a2)->capture_default_str();
    bern->add_option("--theta", b_theta)->capture_default_str();
    bern->add_option("--deltas", b_deltas)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*feasible) {
            StatsPtr hist, cur;
            long n0 = f_n0, p = f_p;
            if (f_hist.given()) {
                hist = load_stats(f_hist, "historical");
                n0 = static_cast<long>(pb_stats_n(hist.get()));
                p = static_cast<long>(pb_stats_p(hist.get()));
            }
            if (f_cur.given()) cur = load_stats(f_cur, "current");
            if (n0 <= 0) invalid("feasible needs --n0 or --historical");
            if (p <= 0) invalid("--p must be positive");
            const auto prior = load_prior(f_prior, static_cast<size_t>(p), hist.get(), cur.get());
            pb_feasible_set fs{};
            check(pb_feasible_set_compute(prior.get(), n0, p, &fs));
            std::cout << feasible_json(fs).dump() << '\n';
        } else if (*select) {
            const auto l = load_context(s_data);
            const pb_criterion crit = parse_criterion(s_criterion);
            pb_profile* raw = nullptr;
            check(pb_select_delta(l.ctx.get(), crit, s_grid, s_tol, &raw));
            ProfilePtr prof(raw);
            const double delta = pb_profile_selected(prof.get());
            json out;
            out["criterion"] = crit == PB_CRITERION_DIC ? "dic" : "eb";
            out["delta"] = delta;
            out["value"] = pb_profile_selected_value(prof.get());
            if (crit == PB_CRITERION_DIC) {
                double dic = 0.0, pd = 0.0;
                check(pb_dic(l.ctx.get(), delta, &dic, &pd));
                out["dic"] = dic;
                out["p_d"] = pd;
            } else {
                double lm = 0.0;
                check(pb_log_marginal_likelihood(l.ctx.get(), delta, &lm));
                out["log_marginal_likelihood"] = lm;
            }
            pb_feasible_set fs{};
            check(pb_context_feasible_set(l.ctx.get(), &fs));
            out["feasible"] = feasible_json(fs);
            out["prior"] = pb_prior_label(l.prior.get());
            out["posterior"] = posterior_summary(l.ctx.get(), delta);
            if (!s_profile.empty()) {
                write_file(s_profile, profile_csv(prof.get(), "value"));
                out["profile"] = s_profile;
            } else {
                out["profile"] = nullptr;
            }
            emit(out.dump(2), s_output);
        } else if (*profile) {
            const auto l = load_context(p_data);
            const pb_criterion crit = parse_criterion(p_criterion);
            pb_profile* raw = nullptr;
            check(pb_profile_curve(l.ctx.get(), crit, p_grid, &raw));
            ProfilePtr prof(raw);
            if (p_format == "csv") {
                emit(profile_csv(prof.get(), crit == PB_CRITERION_DIC ? "dic" : "log_marginal_likelihood"), p_output);
            } else {
                json out;
                out["criterion"] = crit == PB_CRITERION_DIC ? "dic" : "eb";
                out["best_grid_delta"] = pb_profile_selected(prof.get());
                out["rows"] = profile_json(prof.get());
                emit(out.dump(2), p_output);
            }
        } else if (*post) {
            const auto l = load_context(q_data);
            json out;
            out["delta"] = q_delta;
            out["posterior"] = posterior_summary(l.ctx.get(), q_delta);
            double nu0 = 0.0, nu = 0.0, h0 = 0.0, h = 0.0;
            check(pb_nig_coefficients(l.ctx.get(), q_delta, &nu0, &nu, &h0, &h, nullptr, nullptr));
            out["nu0"] = nu0;
            out["nu"] = nu;
            out["h0"] = h0;
            out["h"] = h;
            double lm = 0.0;
            if (pb_log_marginal_likelihood(l.ctx.get(), q_delta, &lm) == PB_OK) out["log_marginal_likelihood"] = lm;
            double dic = 0.0, pd = 0.0;
            if (pb_dic(l.ctx.get(), q_delta, &dic, &pd) == PB_OK) {
                out["dic"] = dic;
                out["p_d"] = pd;
            }
            if (q_draws > 0) {
                if (q_draws_out.empty()) invalid("--draws needs --draws-output");
                const std::uint64_t seed = resolve_seed(q_seed, 1);
                const size_t p = pb_context_p(l.ctx.get());
                std::vector<double> beta(static_cast<size_t>(q_draws) * p), sigma2(static_cast<size_t>(q_draws));
                check(pb_sample_posterior(l.ctx.get(), q_delta, static_cast<size_t>(q_draws), seed, beta.data(),
                                          sigma2.data()));
                std::string csv;
                for (size_t j = 0; j < p; ++j) csv += "beta" + std::to_string(j + 1) + ",";
                csv += "sigma2\n";
                for (size_t i = 0; i < static_cast<size_t>(q_draws); ++i) {
                    for (size_t j = 0; j < p; ++j) csv += fmt17(beta[i * p + j]) + ",";
                    csv += fmt17(sigma2[i]) + "\n";
                }
                write_file(q_draws_out, csv);
                out["draws"] = {{"path", q_draws_out}, {"count", q_draws}, {"seed", seed}};
            }
            emit(out.dump(2), q_output);
        } else if (*dpost) {
            const auto l = load_context(d_data);
            LogDeltaBeta beta{1.0, 1.0};
            pb_log_delta_prior_fn fn = nullptr;
            if (d_prior_delta.rfind("beta:", 0) == 0) {
                const auto ab = parse_list(d_prior_delta.substr(5), "--delta-prior");
                if (ab.size() != 2 || !(ab[0] > 0.0) || !(ab[1] > 0.0)) invalid("--delta-prior beta:a,b needs a, b > 0");
                beta = {ab[0], ab[1]};
                fn = beta_log_density;
            } else if (d_prior_delta != "uniform") {
                invalid("--delta-prior must be 'uniform' or 'beta:a,b'");
            }
            pb_profile* raw = nullptr;
            double mean = 0.0;
            check(pb_delta_posterior(l.ctx.get(), fn, &beta, d_grid, &raw, &mean));
            ProfilePtr prof(raw);
            if (d_format == "csv") {
                emit(profile_csv(prof.get(), "density"), d_output);
            } else {
                json out;
                out["mean"] = mean;
                out["mode"] = pb_profile_selected(prof.get());
                pb_feasible_set fs{};
                check(pb_context_feasible_set(l.ctx.get(), &fs));
                out["feasible"] = feasible_json(fs);
                out["rows"] = profile_json(prof.get());
                emit(out.dump(2), d_output);
            }
        } else if (*simulate) {
            pb_sim_result* raw = nullptr;
            std::uint64_t seed = 0;
            if (*fig1) {
                pb_fig1_config cfg;
                pb_fig1_config_default(&cfg);
                cfg.n = m1_n;
                cfg.n0 = m1_n0;
                cfg.s = m1_s;
                cfg.s0 = m1_s0;
                cfg.ybar = m1_ybar;
                cfg.select_grid_size = m1_select_grid;
                std::vector<double> grid;
                if (!m1_grid.empty()) {
                    grid = parse_list(m1_grid, "--grid");
                    cfg.discrepancy_grid = grid.data();
                    cfg.grid_len = grid.size();
                }
                cfg.methods = m_methods.empty() ? nullptr : m_methods.c_str();
                check(pb_simulate_fig1(&cfg, &raw));
            } else {
                pb_fig2_config cfg;
                pb_fig2_config_default(&cfg);
                seed = resolve_seed(m2_seed, cfg.seed);
                cfg.seed = seed;
                cfg.replicates = m2_replicates;
                cfg.workers = m2_workers;
                cfg.sigma = m2_sigma;
                cfg.n = m2_n;
                cfg.n0 = m2_n0;
                cfg.select_grid_size = m2_select_grid;
                cfg.common_random_numbers = m2_independent ? 0 : 1;
                std::vector<double> grid;
                if (!m2_grid.empty()) {
                    grid = parse_list(m2_grid, "--grid");
                    cfg.beta04_grid = grid.data();
                    cfg.grid_len = grid.size();
                }
                cfg.methods = m_methods.empty() ? nullptr : m_methods.c_str();
                check(pb_simulate_fig2(&cfg, &raw));
            }
            SimPtr result(raw);
            OwnedString csv, js;
            check(pb_sim_result_csv(result.get(), &csv.s));
            check(pb_sim_result_json(result.get(), &js.s));
            if (!m_csv.empty()) write_file(m_csv, csv.s);
            if (!m_json.empty()) write_file(m_json, js.s);
            json echo = {{"study", *fig1 ? "fig1" : "fig2"},
                         {"seed", seed},
                         {"config_hash", pb_sim_result_config_hash(result.get())},
                         {"records", pb_sim_result_size(result.get())}};
            if (!m_csv.empty()) echo["csv"] = m_csv;
            if (!m_json.empty()) echo["json"] = m_json;
            if (m_csv.empty() && m_json.empty()) {
                std::cout << csv.s;
                std::cerr << echo.dump() << '\n';
            } else {
                std::cout << echo.dump() << '\n';
            }
        } else if (*oracle) {
            if (!(o_draws >= 1.0) || o_draws > 1e9) invalid("--dic-draws must be between 1 and 1e9");
            const std::uint64_t seed = resolve_seed(o_seed, 20240101);
            OwnedString report;
            int passed = 0;
            check(pb_oracle_check(o_case.c_str(), std::lround(o_draws), seed, &report.s, &passed));
            const json rows = json::parse(report.s);
            long failed = 0;
            for (const auto& r : rows) {
                const bool ok = r.at("passed").get<bool>();
                failed += ok ? 0 : 1;
                const std::string observed = r.at("observed").is_null() ? "nan" : fmt17(r.at("observed").get<double>());
                std::cout << (ok ? "PASS " : "FAIL ") << r.at("name").get<std::string>() << " observed=" << observed
                          << " tol=" << fmt17(r.at("tolerance").get<double>()) << " "
                          << r.at("detail").get<std::string>() << '\n';
            }
            std::cout << rows.size() - failed << "/" << rows.size() << " checks passed\n";
            if (!passed) return kExitCheckFailed;
        } else if (*bern) {
            const auto deltas = parse_list(b_deltas, "--deltas");
            const double log_c0 = pb_log_binomial_coefficient(b_n0, b_y0);
            if (std::isnan(log_c0)) invalid("DomainError: need 0 <= y0 <= n0");
            json rows = json::array();
            double max_npp_gap = 0.0;
            for (const double d : deltas) {
                double npp_plain = 0.0, npp_binom = 0.0, jpp_plain = 0.0, jpp_binom = 0.0;
                check(pb_bernoulli_npp_log_density(b_theta, d, b_y0, b_n0, b_a1, b_a2, 0.0, &npp_plain));
                check(pb_bernoulli_npp_log_density(b_theta, d, b_y0, b_n0, b_a1, b_a2, log_c0, &npp_binom));
                check(pb_bernoulli_jpp_log_kernel(b_theta, d, b_y0, b_n0, b_a1, b_a2, 0.0, &jpp_plain));
                check(pb_bernoulli_jpp_log_kernel(b_theta, d, b_y0, b_n0, b_a1, b_a2, log_c0, &jpp_binom));
                max_npp_gap = std::max(max_npp_gap, std::abs(npp_binom - npp_plain));
                rows.push_back({{"delta", d},
                                {"npp_log_density", npp_plain},
                                {"npp_log_density_binomial", npp_binom},
                                {"jpp_log_kernel", jpp_plain},
                                {"jpp_log_kernel_binomial", jpp_binom}});
            }
            json out = {{"theta", b_theta}, {"y0", b_y0},   {"n0", b_n0},
                        {"log_c0", log_c0}, {"rows", rows}, {"max_npp_gap", max_npp_gap}};
            std::cout << out.dump(2) << '\n';
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitOk;
}
