#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "powerborrow/delta_selection.hpp"

namespace powerborrow::sim {

enum class Method {
    EB1,  // empirical Bayes, reference prior
    EB2,  // empirical Bayes, vague conditional-normal prior (mu0 = 0, R = 1e-4 I, t = 1 + p/2)
    DIC,  // DIC, reference prior
};

const char* method_name(Method m) noexcept;
Method parse_method(const std::string& name);

PriorSpec method_prior(Method m, long p);
Criterion method_criterion(Method m) noexcept;

struct Fig1Config {
    long n = 10;
    long n0 = 10;
    double s = 0.5;
    double s0 = 0.5;
    double ybar = 0.0;
    std::vector<double> discrepancy_grid = default_discrepancy_grid();
    std::vector<Method> methods = {Method::EB1, Method::EB2, Method::DIC};
    long grid_size = 256;
    double tol = 1e-7;

    static std::vector<double> default_discrepancy_grid();  // 0 to 1.5 step 0.05
    void validate() const;
};

struct Fig2Config {
    std::vector<double> beta_current = {1.0, 1.0, 1.0, 1.0};
    std::vector<double> beta04_grid = default_beta04_grid();
    long n = 20;
    long n0 = 20;
    double sigma = 1.0;
    long replicates = 200;
    std::uint64_t seed = 20230817;
    std::vector<Method> methods = {Method::EB1, Method::EB2, Method::DIC};
    long grid_size = 64;
    double tol = 1e-6;
    unsigned workers = 1;
    // Same replicate streams in every cell, so cells differ only through beta04.
    bool common_random_numbers = true;

    static std::vector<double> default_beta04_grid();  // 1 to 3, 9 points
    void validate() const;
};

struct SimRecord {
    double cell = 0.0;  // discrepancy (fig1) or beta04 - beta4 (fig2)
    Method method = Method::EB1;
    double mean_delta = 0.0;
    double log_mse = 0.0;  // NaN for fig1
    long replicates = 0;
    long failures = 0;
    double elapsed_seconds = 0.0;
};

struct SimResult {
    std::string study;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<SimRecord> records;
    double elapsed_seconds = 0.0;

    const SimRecord& find(double cell, Method m) const;
};

// Intercept column plus p - 1 uniform(0, 1) covariates, Gaussian noise with sd sigma.
Dataset generate_linear_data(const Vector& beta, double sigma, long n, std::uint64_t seed);

// Stream seed as a pure function of (seed, cell, replicate, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t replicate, std::uint64_t stream);

SimResult run_fig1(const Fig1Config& cfg);
SimResult run_fig2(const Fig2Config& cfg);

// cell,method,mean_delta,log_mse,replicates,failures with 17 significant digits.
std::string to_csv(const SimResult& result);
std::string to_json(const SimResult& result);

std::string config_hash(const Fig1Config& cfg);
std::string config_hash(const Fig2Config& cfg);

}  // namespace powerborrow::sim
