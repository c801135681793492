#include "doctest.h"

#include <cmath>
#include <random>

#include "powerborrow/delta_selection.hpp"
#include "support.hpp"

using namespace powerborrow;

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

PowerPosteriorContext fig1_ctx(double discrepancy, const PriorSpec& prior = make_reference_prior(1)) {
    return make_context(prior, stats_from_summary(10, discrepancy, 0.5), stats_from_summary(10, 0.0, 0.5));
}

struct GridOptimum {
    double arg;
    double value;
    double spacing;
};

// Brute-force optimum over a uniform grid on [lo, hi], skipping points where the objective throws.
GridOptimum dense_grid(Criterion kind, const PowerPosteriorContext& ctx, long points) {
    const auto dom = search_domain(kind, ctx);
    const bool maximize = kind == Criterion::MarginalLikelihood;
    GridOptimum best{std::nan(""), maximize ? -INFINITY : INFINITY, (dom.hi - dom.lo) / (points - 1)};
    for (long i = 0; i < points; ++i) {
        const double d = dom.lo + (dom.hi - dom.lo) * i / (points - 1);
        double v;
        try {
            v = criterion_value(kind, d, ctx);
        } catch (const Error&) {
            continue;
        }
        if (maximize ? v > best.value : v < best.value) best = {d, v, best.spacing};
    }
    return best;
}

}  // namespace

TEST_CASE("EB selection never leaves the open feasible interval") {
    for (double d = 0.0; d <= 1.5 + 1e-12; d += 0.05) {
        const auto ctx = fig1_ctx(d);
        const auto prof = select_delta(Criterion::MarginalLikelihood, ctx);
        CHECK(prof.selected > 0.1);
        CHECK(prof.selected <= 1.0);
        CHECK(ctx.feasible.contains(prof.selected));
    }
}

TEST_CASE("selection agrees with a dense grid") {
    const PriorSpec nig = make_nig_prior(Vector::Zero(1), Matrix::Constant(1, 1, 0.5), 2.0, 0.3);
    for (double d : {0.0, 0.5, 0.8, 1.5}) {
        for (const auto& prior : {make_reference_prior(1), nig}) {
            const auto ctx = fig1_ctx(d, prior);
            for (auto kind : {Criterion::MarginalLikelihood, Criterion::Dic}) {
                const auto grid = dense_grid(kind, ctx, 10000);
                const auto prof = select_delta(kind, ctx);
                CHECK(std::abs(prof.selected - grid.arg) <= 2.0 * grid.spacing);
                if (kind == Criterion::MarginalLikelihood) {
                    CHECK(prof.selected_value >= grid.value - 1e-12 * std::abs(grid.value));
                } else {
                    CHECK(prof.selected_value <= grid.value + 1e-12 * std::abs(grid.value));
                }
            }
        }
    }
}

TEST_CASE("identical data with a proper prior favour borrowing") {
    const auto s = stats_from_summary(15, 0.4, 1.1);
    const auto prior = make_nig_prior(Vector::Zero(1), Matrix::Constant(1, 1, 0.2), 1.5, 0.5);
    const auto ctx = make_context(prior, s, s);
    const auto grid = dense_grid(Criterion::MarginalLikelihood, ctx, 10000);
    const auto prof = select_delta(Criterion::MarginalLikelihood, ctx);
    CHECK(grid.arg > 0.5);
    CHECK(std::abs(prof.selected - grid.arg) <= grid.spacing);
}

TEST_CASE("profile curve") {
    const auto ctx = fig1_ctx(0.3);
    const auto prof = profile_curve(Criterion::MarginalLikelihood, ctx, 101);
    REQUIRE(prof.grid.size() == 101);
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
        const double d = prof.grid[i];
        CHECK(prof.feasible_mask[i] == (d > 0.1 + FeasibleSet::kBoundaryGuard));
        if (prof.feasible_mask[i]) {
            CHECK(prof.values[i] == log_marginal_likelihood(d, ctx));
        } else {
            CHECK(std::isnan(prof.values[i]));
        }
    }
    const auto big = make_context(make_reference_prior(1), stats_from_summary(30, 0.4, 0.5),
                                  stats_from_summary(30, 0.0, 0.5));
    const auto dic_prof = profile_curve(Criterion::Dic, big, 101);
    for (std::size_t i = 0; i < dic_prof.grid.size(); ++i) {
        CHECK(dic_prof.feasible_mask[i]);
        CHECK(std::isfinite(dic_prof.values[i]));
    }
    CHECK(code_of([&] { profile_curve(Criterion::Dic, ctx, 16); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("search domains") {
    const auto ref = fig1_ctx(0.0);
    const auto eb = search_domain(Criterion::MarginalLikelihood, ref);
    CHECK(eb.lo == doctest::Approx(0.1 + kEbInteriorClip).epsilon(1e-15));
    CHECK(eb.hi == 1.0);
    CHECK(search_domain(Criterion::Dic, ref).lo == kDicLowerClip);
    const auto nig = fig1_ctx(0.0, make_nig_prior(Vector::Zero(1), Matrix::Constant(1, 1, 1.0), 1.0, 1.0));
    CHECK(search_domain(Criterion::MarginalLikelihood, nig).lo == 0.0);

    // Shape at delta is 1.5 delta + t - 0.5 here, so the DIC domain starts where it exceeds one.
    Matrix x(3, 2);
    x << 1, 0, 1, 1, 1, 2;
    Vector y(3);
    y << 0.1, 0.9, 2.3;
    const auto s = sufficient_stats(Dataset{x, y});
    const auto shifted = make_context(make_reference_prior(2), s, s);
    const auto dom = search_domain(Criterion::Dic, shifted);
    CHECK(dom.lo == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(posterior(dom.lo, shifted).shape > 1.0);
    const auto tiny = stats_from_summary(2, 0.3, 1.0);
    const auto empty = make_context(make_custom_prior(0.5, 0.0, 0, Vector::Zero(1), Matrix::Zero(1, 1)), tiny, tiny);
    CHECK(code_of([&] { select_delta(Criterion::Dic, empty); }) == ErrorCode::EmptyDomain);
}

TEST_CASE("argument validation") {
    const auto ctx = fig1_ctx(0.0);
    CHECK(code_of([&] { select_delta(Criterion::MarginalLikelihood, ctx, 16, 1e-7); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { select_delta(Criterion::MarginalLikelihood, ctx, 64, 1e-3); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { select_delta(Criterion::MarginalLikelihood, ctx, 64, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("objective shifts do not move the optimum") {
    const auto ctx = fig1_ctx(0.9);
    const auto dom = search_domain(Criterion::MarginalLikelihood, ctx);
    const auto f = [&](double d) { return log_marginal_likelihood(d, ctx); };
    const auto a = optimize_on_interval(f, dom.lo, dom.hi, 128, 1e-7, true);
    const auto b = optimize_on_interval([&](double d) { return f(d) + 100.0; }, dom.lo, dom.hi, 128, 1e-7, true);
    CHECK(std::abs(a.selected - b.selected) < 1e-6);
}

TEST_CASE("ties resolve to the smallest delta") {
    const auto flat = optimize_on_interval([](double) { return 3.0; }, 0.2, 1.0, 64, 1e-7, true);
    CHECK(flat.selected == 0.2);
    const auto plateau =
        optimize_on_interval([](double d) { return d < 0.5 ? (d - 0.5) * (d - 0.5) : 0.0; }, 0.0, 1.0, 64, 1e-7, false);
    CHECK(plateau.selected_value == 0.0);
    CHECK(plateau.selected >= 0.5);
    CHECK(plateau.selected <= 32.0 / 63.0 + 1e-12);
}

TEST_CASE("masked points are skipped") {
    const auto prof = optimize_on_interval(
        [](double d) {
            if (d < 0.3) throw Error(ErrorCode::OutsideFeasibleSet, "masked");
            return -(d - 0.6) * (d - 0.6);
        },
        0.0, 1.0, 64, 1e-8, true);
    CHECK(prof.selected == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(code_of([] {
              optimize_on_interval([](double) -> double { throw Error(ErrorCode::OutsideFeasibleSet, "x"); }, 0.0,
                                   1.0, 64, 1e-7, true);
          }) == ErrorCode::EmptyDomain);
}

TEST_CASE("refinement is never worse than the coarse grid") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ud(0.0, 1.5), us(0.2, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const auto ctx = make_context(make_reference_prior(1), stats_from_summary(12, ud(rng), us(rng)),
                                      stats_from_summary(9, 0.0, us(rng)));
        for (auto kind : {Criterion::MarginalLikelihood, Criterion::Dic}) {
            const auto prof = select_delta(kind, ctx, 64, 1e-7);
            for (std::size_t i = 0; i < prof.grid.size(); ++i) {
                if (!prof.feasible_mask[i]) continue;
                if (kind == Criterion::MarginalLikelihood) {
                    CHECK(prof.selected_value >= prof.values[i]);
                } else {
                    CHECK(prof.selected_value <= prof.values[i]);
                }
            }
        }
    }
}

TEST_CASE("selected delta decreases as the historical mean drifts") {
    const auto eb2 = make_custom_prior(1.5, 0.0, 1, Vector::Zero(1), Matrix::Constant(1, 1, 1e-4));
    const std::pair<Criterion, PriorSpec> methods[] = {{Criterion::MarginalLikelihood, make_reference_prior(1)},
                                                       {Criterion::MarginalLikelihood, eb2},
                                                       {Criterion::Dic, make_reference_prior(1)}};
    for (const auto& [kind, prior] : methods) {
        double prev = INFINITY;
        for (int i = 0; i <= 6; ++i) {
            const double sel = select_delta(kind, fig1_ctx(0.25 * i, prior)).selected;
            CHECK(sel <= prev + 0.02);
            prev = sel;
        }
    }
}
