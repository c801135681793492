#pragma once

#include <functional>

#include "powerborrow/power_posterior.hpp"

namespace powerborrow {

enum class Criterion {
    MarginalLikelihood,  // maximize log m(delta | D0, D) over the feasible set
    Dic,                 // minimize DIC over deltas with a posterior shape above 1
};

const char* criterion_name(Criterion kind) noexcept;

// Interior clip at an open lower endpoint, and the DIC lower clip.
inline constexpr double kEbInteriorClip = 1e-6;
inline constexpr double kDicLowerClip = 1e-6;

struct SearchInterval {
    double lo = 0.0;
    double hi = 1.0;
};

// [lo, hi] searched by select_delta for the given criterion.
SearchInterval search_domain(Criterion kind, const PowerPosteriorContext& ctx);

// Criterion value at delta; throws when delta is not admissible for it.
double criterion_value(Criterion kind, double delta, const PowerPosteriorContext& ctx);

// Whether delta is admissible for the criterion (pointwise, without the search clips).
bool criterion_admits(Criterion kind, double delta, const PowerPosteriorContext& ctx);

// Grid scan plus golden-section refinement of a 1-D objective on [lo, hi].
// Points where the objective throws are masked out. Ties go to the smallest delta.
DeltaProfile optimize_on_interval(const std::function<double(double)>& objective, double lo, double hi,
                                  long grid_size, double tol, bool maximize);

DeltaProfile select_delta(Criterion kind, const PowerPosteriorContext& ctx, long grid_size = 128,
                          double tol = 1e-7);

// Criterion tabulated on a uniform grid over [0, 1] without refinement.
DeltaProfile profile_curve(Criterion kind, const PowerPosteriorContext& ctx, long grid_size = 101);

}  // namespace powerborrow
