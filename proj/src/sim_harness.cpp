#include "powerborrow/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace powerborrow::sim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ";";
        if constexpr (std::is_same_v<T, Method>) {
            out += method_name(v[i]);
        } else {
            out += fmt17(v[i]);
        }
    }
    return out;
}

void check_methods(const std::vector<Method>& methods) {
    if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "at least one method is required");
}

}  // namespace

const char* method_name(Method m) noexcept {
    switch (m) {
        case Method::EB1: return "EB1";
        case Method::EB2: return "EB2";
        case Method::DIC: return "DIC";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "EB1" || name == "eb1") return Method::EB1;
    if (name == "EB2" || name == "eb2") return Method::EB2;
    if (name == "DIC" || name == "dic") return Method::DIC;
    throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "' (expected EB1, EB2 or DIC)");
}

PriorSpec method_prior(Method m, long p) {
    if (m == Method::EB2) {
        // pi0(sigma2) ∝ 1/sigma2 and beta | sigma2 ~ N(0, 1e4 sigma2 I)
        auto prior = make_custom_prior(1.0 + 0.5 * static_cast<double>(p), 0.0, 1, Vector::Zero(p),
                                       Matrix::Identity(p, p) * 1e-4);
        prior.label = "vague_normal";
        return prior;
    }
    return make_reference_prior(p);
}

Criterion method_criterion(Method m) noexcept {
    return m == Method::DIC ? Criterion::Dic : Criterion::MarginalLikelihood;
}

std::vector<double> Fig1Config::default_discrepancy_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 30; ++i) grid.push_back(0.05 * i);
    return grid;
}

void Fig1Config::validate() const {
    if (n < 2 || n0 < 2) throw Error(ErrorCode::InvalidArgument, "fig1 needs n, n0 >= 2");
    if (!(s > 0.0) || !(s0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "fig1 needs positive sds");
    if (discrepancy_grid.empty() || !std::is_sorted(discrepancy_grid.begin(), discrepancy_grid.end())) {
        throw Error(ErrorCode::InvalidArgument, "discrepancy grid must be non-empty and ascending");
    }
    check_methods(methods);
}

std::vector<double> Fig2Config::default_beta04_grid() {
    std::vector<double> grid;
    for (int i = 0; i <= 8; ++i) grid.push_back(1.0 + 0.25 * i);
    return grid;
}

void Fig2Config::validate() const {
    if (beta_current.size() < 1) throw Error(ErrorCode::InvalidArgument, "beta_current must be non-empty");
    const auto p = static_cast<long>(beta_current.size());
    if (n <= p || n0 <= p) throw Error(ErrorCode::InvalidArgument, "fig2 needs n, n0 > p");
    if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be non-negative");
    if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
    if (beta04_grid.empty()) throw Error(ErrorCode::InvalidArgument, "beta04 grid must be non-empty");
    check_methods(methods);
}

const SimRecord& SimResult::find(double cell, Method m) const {
    for (const auto& r : records) {
        if (r.method == m && std::abs(r.cell - cell) < 1e-12) return r;
    }
    throw Error(ErrorCode::InvalidArgument, "no record for cell " + fmt17(cell) + " method " + method_name(m));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t replicate, std::uint64_t stream) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ cell);
    h = splitmix64(h ^ replicate);
    return splitmix64(h ^ stream);
}

Dataset generate_linear_data(const Vector& beta, double sigma, long n, std::uint64_t seed) {
    const auto p = beta.size();
    if (p < 1 || n <= p) throw Error(ErrorCode::ShapeMismatch, "generate_linear_data needs n > p >= 1");
    if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset data;
    data.x.resize(n, p);
    data.y.resize(n);
    for (long i = 0; i < n; ++i) {
        data.x(i, 0) = 1.0;
        for (Eigen::Index j = 1; j < p; ++j) data.x(i, j) = unif(rng);
    }
    for (long i = 0; i < n; ++i) data.y[i] = data.x.row(i).dot(beta) + sigma * normal(rng);
    return data;
}

SimResult run_fig1(const Fig1Config& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    SimResult out;
    out.study = "fig1";
    out.config_hash = config_hash(cfg);
    const auto stats = stats_from_summary(cfg.n, cfg.ybar, cfg.s);
    for (const double d : cfg.discrepancy_grid) {
        const auto stats0 = stats_from_summary(cfg.n0, cfg.ybar + d, cfg.s0);
        for (const auto m : cfg.methods) {
            const auto cell_start = Clock::now();
            const auto ctx = make_context(method_prior(m, 1), stats0, stats);
            SimRecord rec;
            rec.cell = d;
            rec.method = m;
            rec.log_mse = std::numeric_limits<double>::quiet_NaN();
            rec.replicates = 1;
            rec.mean_delta = select_delta(method_criterion(m), ctx, cfg.grid_size, cfg.tol).selected;
            rec.elapsed_seconds = seconds_since(cell_start);
            out.records.push_back(rec);
        }
    }
    out.elapsed_seconds = seconds_since(start);
    return out;
}

namespace {

struct ReplicateOutcome {
    std::vector<double> delta;
    std::vector<double> sq_error;
    std::vector<bool> failed;
    double seconds = 0.0;
};

ReplicateOutcome run_replicate(const Fig2Config& cfg, std::size_t cell, long rep) {
    const auto start = Clock::now();
    const auto p = static_cast<Eigen::Index>(cfg.beta_current.size());
    const Vector beta = Eigen::Map<const Vector>(cfg.beta_current.data(), p);
    Vector beta0 = beta;
    beta0[p - 1] = cfg.beta04_grid[cell];

    const std::uint64_t stream_cell = cfg.common_random_numbers ? 0 : cell;
    const auto current = generate_linear_data(beta, cfg.sigma, cfg.n, derive_seed(cfg.seed, stream_cell, rep, 0));
    const auto historical =
        generate_linear_data(beta0, cfg.sigma, cfg.n0, derive_seed(cfg.seed, stream_cell, rep, 1));

    ReplicateOutcome out;
    const auto nm = cfg.methods.size();
    out.delta.assign(nm, 0.0);
    out.sq_error.assign(nm, 0.0);
    out.failed.assign(nm, false);
    try {
        const auto stats = sufficient_stats(current);
        const auto stats0 = sufficient_stats(historical);
        for (std::size_t k = 0; k < nm; ++k) {
            try {
                const auto ctx = make_context(method_prior(cfg.methods[k], p), stats0, stats);
                const double d = select_delta(method_criterion(cfg.methods[k]), ctx, cfg.grid_size, cfg.tol).selected;
                const double est = posterior(d, ctx).location[p - 1];
                out.delta[k] = d;
                out.sq_error[k] = (est - beta[p - 1]) * (est - beta[p - 1]);
            } catch (const Error&) {
                out.failed[k] = true;
            }
        }
    } catch (const Error&) {
        out.failed.assign(nm, true);
    }
    out.seconds = seconds_since(start);
    return out;
}

}  // namespace

SimResult run_fig2(const Fig2Config& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    const std::size_t cells = cfg.beta04_grid.size();
    const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
    const std::size_t tasks = cells * reps;
    std::vector<ReplicateOutcome> outcomes(tasks);

    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(tasks)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < tasks; i = next++) {
            outcomes[i] = run_replicate(cfg, i / reps, static_cast<long>(i % reps));
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    SimResult out;
    out.study = "fig2";
    out.seed = cfg.seed;
    out.config_hash = config_hash(cfg);
    const double beta4 = cfg.beta_current.back();
    for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t k = 0; k < cfg.methods.size(); ++k) {
            SimRecord rec;
            rec.cell = cfg.beta04_grid[c] - beta4;
            rec.method = cfg.methods[k];
            double sum_delta = 0.0;
            double sum_sq = 0.0;
            for (std::size_t r = 0; r < reps; ++r) {
                const auto& o = outcomes[c * reps + r];
                rec.elapsed_seconds += o.seconds / static_cast<double>(cfg.methods.size());
                if (o.failed[k]) {
                    ++rec.failures;
                    continue;
                }
                ++rec.replicates;
                sum_delta += o.delta[k];
                sum_sq += o.sq_error[k];
            }
            const double nr = static_cast<double>(rec.replicates);
            rec.mean_delta = rec.replicates > 0 ? sum_delta / nr : std::numeric_limits<double>::quiet_NaN();
            rec.log_mse = rec.replicates > 0 ? std::log(sum_sq / nr) : std::numeric_limits<double>::quiet_NaN();
            out.records.push_back(rec);
        }
    }
    out.elapsed_seconds = seconds_since(start);
    return out;
}

std::string to_csv(const SimResult& result) {
    std::string out = "cell,method,mean_delta,log_mse,replicates,failures\n";
    for (const auto& r : result.records) {
        out += fmt17(r.cell) + "," + method_name(r.method) + "," + fmt17(r.mean_delta) + "," + fmt17(r.log_mse) +
               "," + std::to_string(r.replicates) + "," + std::to_string(r.failures) + "\n";
    }
    return out;
}

std::string to_json(const SimResult& result) {
    nlohmann::json j;
    j["study"] = result.study;
    j["seed"] = result.seed;
    j["config_hash"] = result.config_hash;
    j["elapsed_seconds"] = result.elapsed_seconds;
    auto& recs = j["records"] = nlohmann::json::array();
    for (const auto& r : result.records) {
        nlohmann::json rec;
        rec["cell"] = r.cell;
        rec["method"] = method_name(r.method);
        rec["mean_delta"] = r.mean_delta;
        rec["log_mse"] = std::isnan(r.log_mse) ? nlohmann::json(nullptr) : nlohmann::json(r.log_mse);
        rec["replicates"] = r.replicates;
        rec["failures"] = r.failures;
        rec["elapsed_seconds"] = r.elapsed_seconds;
        recs.push_back(rec);
    }
    return j.dump(2) + "\n";
}

std::string config_hash(const Fig1Config& cfg) {
    std::ostringstream os;
    os << "fig1|" << cfg.n << "|" << cfg.n0 << "|" << fmt17(cfg.s) << "|" << fmt17(cfg.s0) << "|" << fmt17(cfg.ybar)
       << "|" << join(cfg.discrepancy_grid) << "|" << join(cfg.methods) << "|" << cfg.grid_size << "|"
       << fmt17(cfg.tol);
    return fnv1a_hex(os.str());
}

std::string config_hash(const Fig2Config& cfg) {
    // workers is deliberately absent: it does not affect results.
    std::ostringstream os;
    os << "fig2|" << join(cfg.beta_current) << "|" << join(cfg.beta04_grid) << "|" << cfg.n << "|" << cfg.n0 << "|"
       << fmt17(cfg.sigma) << "|" << cfg.replicates << "|" << cfg.seed << "|" << join(cfg.methods) << "|"
       << cfg.grid_size << "|" << fmt17(cfg.tol) << "|" << (cfg.common_random_numbers ? "crn" : "indep");
    return fnv1a_hex(os.str());
}

}  // namespace powerborrow::sim
