#include "powerborrow/delta_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace powerborrow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInvPhi = 0.61803398874989484820;

double tie_tolerance(double best) { return 1e-12 * std::max(1.0, std::abs(best)); }

// NaN-safe "a beats b" for maximization.
bool better(double a, double b) {
    if (std::isnan(a)) return false;
    if (std::isnan(b)) return true;
    return a > b + tie_tolerance(b);
}

double posterior_shape(double delta, const PowerPosteriorContext& ctx) {
    return 0.5 * (static_cast<double>(ctx.stats0.n) * delta - static_cast<double>(ctx.p())) + ctx.prior.t - 1.0 +
           0.5 * static_cast<double>(ctx.stats.n);
}

std::vector<double> uniform_grid(double lo, double hi, long size) {
    std::vector<double> grid(size);
    for (long i = 0; i < size; ++i) {
        grid[i] = i + 1 == size ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(size - 1);
    }
    return grid;
}

}  // namespace

const char* criterion_name(Criterion kind) noexcept {
    return kind == Criterion::MarginalLikelihood ? "marginal_likelihood" : "dic";
}

SearchInterval search_domain(Criterion kind, const PowerPosteriorContext& ctx) {
    SearchInterval dom;
    dom.hi = 1.0;
    if (kind == Criterion::MarginalLikelihood) {
        const auto& fs = ctx.feasible;
        dom.lo = fs.includes_zero ? 0.0 : fs.lower + kEbInteriorClip;
    } else {
        if (posterior_shape(kDicLowerClip, ctx) > 1.0) {
            dom.lo = kDicLowerClip;
        } else {
            // smallest delta with shape > 1 + 1e-9
            const double n0 = static_cast<double>(ctx.stats0.n);
            dom.lo = (2.0 * (2.0 + 1e-9 - ctx.prior.t) + static_cast<double>(ctx.p()) -
                      static_cast<double>(ctx.stats.n)) / n0 + 1e-12;
        }
    }
    if (dom.lo > dom.hi) {
        throw Error(ErrorCode::EmptyDomain, std::string("no admissible delta for criterion ") + criterion_name(kind));
    }
    return dom;
}

bool criterion_admits(Criterion kind, double delta, const PowerPosteriorContext& ctx) {
    if (kind == Criterion::MarginalLikelihood) return ctx.feasible.contains(delta);
    if (!(delta >= 0.0 && delta <= 1.0)) return false;
    if (!(posterior_shape(delta, ctx) > 1.0 + 1e-9)) return false;
    try {
        return posterior(delta, ctx).is_proper();
    } catch (const Error&) {
        return false;
    }
}

double criterion_value(Criterion kind, double delta, const PowerPosteriorContext& ctx) {
    if (kind == Criterion::MarginalLikelihood) return log_marginal_likelihood(delta, ctx);
    return dic(delta, ctx).dic;
}

DeltaProfile optimize_on_interval(const std::function<double(double)>& objective, double lo, double hi,
                                  long grid_size, double tol, bool maximize) {
    if (grid_size < 32) throw Error(ErrorCode::InvalidArgument, "grid_size must be at least 32");
    if (!(tol > 0.0 && tol <= 1e-4)) throw Error(ErrorCode::InvalidArgument, "tol must lie in (0, 1e-4]");
    if (!(lo <= hi)) throw Error(ErrorCode::EmptyDomain, "empty search interval");
    const double sign = maximize ? 1.0 : -1.0;
    auto score = [&](double x) {
        try {
            const double v = objective(x);
            return std::isfinite(v) ? sign * v : kNaN;
        } catch (const Error&) {
            return kNaN;
        }
    };

    DeltaProfile prof;
    prof.grid = uniform_grid(lo, hi, grid_size);
    prof.values.resize(grid_size);
    prof.feasible_mask.resize(grid_size);
    long best = -1;
    double best_score = kNaN;
    for (long i = 0; i < grid_size; ++i) {
        const double s = score(prof.grid[i]);
        prof.feasible_mask[i] = !std::isnan(s);
        prof.values[i] = std::isnan(s) ? kNaN : sign * s;
        if (better(s, best_score)) {
            best = i;
            best_score = s;
        }
    }
    if (best < 0) throw Error(ErrorCode::EmptyDomain, "objective is not finite anywhere on the search grid");

    double a = prof.grid[std::max<long>(0, best - 1)];
    double c = prof.grid[std::min<long>(grid_size - 1, best + 1)];
    double x1 = c - kInvPhi * (c - a);
    double x2 = a + kInvPhi * (c - a);
    double f1 = score(x1);
    double f2 = score(x2);
    while (c - a > tol) {
        if (!better(f2, f1)) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - kInvPhi * (c - a);
            f1 = score(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (c - a);
            f2 = score(x2);
        }
    }
    const bool take_second = better(f2, f1);
    const double cand = take_second ? x2 : x1;
    const double cand_score = take_second ? f2 : f1;

    double chosen = prof.grid[best];
    double chosen_score = best_score;
    if (better(cand_score, best_score)) {
        chosen = cand;
        chosen_score = cand_score;
    } else if (!std::isnan(cand_score) && !better(best_score, cand_score) && cand < chosen) {
        chosen = cand;
        chosen_score = cand_score;
    }
    prof.selected = chosen;
    prof.selected_value = sign * chosen_score;
    return prof;
}

DeltaProfile select_delta(Criterion kind, const PowerPosteriorContext& ctx, long grid_size, double tol) {
    const auto dom = search_domain(kind, ctx);
    return optimize_on_interval([&](double delta) { return criterion_value(kind, delta, ctx); }, dom.lo, dom.hi,
                                grid_size, tol, kind == Criterion::MarginalLikelihood);
}

DeltaProfile profile_curve(Criterion kind, const PowerPosteriorContext& ctx, long grid_size) {
    if (grid_size < 32) throw Error(ErrorCode::InvalidArgument, "grid_size must be at least 32");
    const double sign = kind == Criterion::MarginalLikelihood ? 1.0 : -1.0;
    DeltaProfile prof;
    prof.grid = uniform_grid(0.0, 1.0, grid_size);
    prof.values.assign(grid_size, kNaN);
    prof.feasible_mask.assign(grid_size, false);
    long best = -1;
    for (long i = 0; i < grid_size; ++i) {
        const double delta = prof.grid[i];
        if (!criterion_admits(kind, delta, ctx)) continue;
        try {
            prof.values[i] = criterion_value(kind, delta, ctx);
        } catch (const Error&) {
            continue;
        }
        prof.feasible_mask[i] = true;
        if (best < 0 || better(sign * prof.values[i], sign * prof.values[best])) best = i;
    }
    if (best < 0) throw Error(ErrorCode::EmptyDomain, "criterion is not finite anywhere on the profile grid");
    prof.selected = prof.grid[best];
    prof.selected_value = prof.values[best];
    return prof;
}

}  // namespace powerborrow
