#include "doctest.h"

#include <cmath>
#include <sstream>

#include "powerborrow/sim_harness.hpp"
#include "support.hpp"

using namespace powerborrow;
using namespace powerborrow::sim;

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

Fig2Config small_fig2() {
    Fig2Config cfg;
    cfg.replicates = 40;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("method table") {
    CHECK(std::string(method_name(Method::EB2)) == "EB2");
    CHECK(parse_method("dic") == Method::DIC);
    CHECK(parse_method("EB1") == Method::EB1);
    CHECK(code_of([] { parse_method("EB3"); }) == ErrorCode::InvalidArgument);
    const auto eb2 = method_prior(Method::EB2, 4);
    CHECK(eb2.t == 3.0);
    CHECK(eb2.k == 1);
    CHECK(eb2.r(2, 2) == 1e-4);
    CHECK(method_prior(Method::DIC, 4).k == 0);
    CHECK(method_criterion(Method::DIC) == Criterion::Dic);
    CHECK(method_criterion(Method::EB2) == Criterion::MarginalLikelihood);
}

TEST_CASE("generated data") {
    Vector beta(3);
    beta << 1.0, -2.0, 0.5;
    const auto exact = generate_linear_data(beta, 0.0, 12, 3);
    CHECK((exact.x * beta - exact.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK(exact.x.col(0).isOnes());
    CHECK(exact.x.rightCols(2).minCoeff() >= 0.0);
    CHECK(exact.x.rightCols(2).maxCoeff() <= 1.0);

    const auto a = generate_linear_data(beta, 1.0, 50, 99);
    const auto b = generate_linear_data(beta, 1.0, 50, 99);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(generate_linear_data(beta, 1.0, 50, 100).y != a.y);

    const auto big = sufficient_stats(generate_linear_data(beta, 1.0, 10000, 5));
    for (int j = 0; j < 3; ++j) CHECK(std::abs(big.beta_hat[j] - beta[j]) < 0.05 * std::max(1.0, std::abs(beta[j])) + 0.05);
    CHECK(big.s / (10000 - 3) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("derived seeds are a pure function of their inputs") {
    CHECK(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 3, 5));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 4, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 3, 3, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(2, 2, 3, 4));
}

TEST_CASE("fig1 orderings") {
    const auto res = run_fig1(Fig1Config{});
    CHECK(res.study == "fig1");
    CHECK(res.records.size() == 31 * 3);
    for (auto m : {Method::EB1, Method::EB2, Method::DIC}) {
        double prev = INFINITY;
        for (double d : Fig1Config::default_discrepancy_grid()) {
            const auto& r = res.find(d, m);
            CHECK(r.failures == 0);
            CHECK(std::isnan(r.log_mse));
            CHECK(r.mean_delta <= prev + 0.02);
            if (m == Method::EB1) CHECK(r.mean_delta > 0.1);
            prev = r.mean_delta;
        }
    }
    const double last = Fig1Config::default_discrepancy_grid().back();
    CHECK(res.find(last, Method::EB2).mean_delta < res.find(last, Method::EB1).mean_delta);
    CHECK(res.find(last, Method::DIC).mean_delta < res.find(last, Method::EB1).mean_delta);
    CHECK(to_csv(res) == to_csv(run_fig1(Fig1Config{})));
}

TEST_CASE("fig2 is reproducible and worker invariant") {
    auto cfg = small_fig2();
    const auto one = run_fig2(cfg);
    CHECK(to_csv(one) == to_csv(run_fig2(cfg)));
    cfg.workers = 3;
    CHECK(to_csv(run_fig2(cfg)) == to_csv(one));
    CHECK(config_hash(cfg) == config_hash(small_fig2()));

    cfg = small_fig2();
    cfg.seed = 8;
    CHECK(config_hash(cfg) != config_hash(small_fig2()));
    CHECK(to_csv(run_fig2(cfg)) != to_csv(one));

    cfg = small_fig2();
    cfg.common_random_numbers = false;
    const auto indep = run_fig2(cfg);
    CHECK(config_hash(cfg) != config_hash(small_fig2()));
    CHECK(to_csv(indep) == to_csv(run_fig2(cfg)));
    // The first cell draws the same streams either way.
    CHECK(indep.find(0.0, Method::EB1).mean_delta == one.find(0.0, Method::EB1).mean_delta);
}

TEST_CASE("fig2 borrowing shrinks with the coefficient shift") {
    const auto res = run_fig2(small_fig2());
    CHECK(res.records.size() == 9 * 3);
    for (auto m : {Method::EB1, Method::EB2, Method::DIC}) {
        CHECK(res.find(0.0, m).mean_delta > res.find(2.0, m).mean_delta);
        CHECK(res.find(0.0, m).failures == 0);
        CHECK(std::isfinite(res.find(1.0, m).log_mse));
    }
    for (double c = 0.0; c <= 2.0 + 1e-12; c += 0.25) CHECK(res.find(c, Method::EB1).mean_delta >= 0.2);
}

TEST_CASE("CSV layout") {
    Fig1Config cfg;
    cfg.discrepancy_grid = {0.0, 0.5};
    cfg.methods = {Method::EB1};
    const auto csv = to_csv(run_fig1(cfg));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "cell,method,mean_delta,log_mse,replicates,failures");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.find(",EB1,") != std::string::npos);
    }
    CHECK(rows == 2);
    const auto json = to_json(run_fig1(cfg));
    CHECK(json.find("\"study\"") != std::string::npos);
    CHECK(json.find("\"records\"") != std::string::npos);
}

TEST_CASE("config validation") {
    Fig1Config f1;
    f1.discrepancy_grid = {1.0, 0.5};
    CHECK(code_of([&] { run_fig1(f1); }) == ErrorCode::InvalidArgument);
    f1 = Fig1Config{};
    f1.s = 0.0;
    CHECK(code_of([&] { run_fig1(f1); }) == ErrorCode::InvalidArgument);
    auto f2 = small_fig2();
    f2.n = 4;
    CHECK(code_of([&] { run_fig2(f2); }) == ErrorCode::InvalidArgument);
    f2 = small_fig2();
    f2.replicates = 0;
    CHECK(code_of([&] { run_fig2(f2); }) == ErrorCode::InvalidArgument);
    f2 = small_fig2();
    f2.methods.clear();
    CHECK(code_of([&] { run_fig2(f2); }) == ErrorCode::InvalidArgument);
}
