#pragma once

#include <string>

#include "powerborrow/model_core.hpp"

namespace powerborrow {

// Initial prior of the conjugate family
//   pi0(beta, sigma2) ∝ sigma2^{-t} exp{ -[b + k/2 (beta - mu0)' R (beta - mu0)] / sigma2 }.
// mu0 and r are ignored when k == 0.
struct PriorSpec {
    double t = 1.0;
    double b = 0.0;
    int k = 0;
    Vector mu0;
    Matrix r;
    std::string label = "custom";
    // When set (proper members only) pi0 carries its normalizing constant, so C(0) = 1.
    bool normalized_initial_prior = false;

    // t > 1 + p/2, b > 0, k = 1: a proper normal-inverse-gamma density.
    bool is_proper(long p) const { return k == 1 && b > 0.0 && t > 1.0 + 0.5 * static_cast<double>(p); }

    // Dimension pinned by the prior itself; 0 when it is dimension-free (k == 0).
    long dim() const { return k == 1 ? static_cast<long>(mu0.size()) : 0; }

    // Log of the NIG normalizing constant (proper priors only).
    double log_normalizer(long p) const;
};

PriorSpec make_reference_prior(long p);
PriorSpec make_zellner_g_prior(double g, const Matrix& xtx, const Vector& mu0);
PriorSpec make_nig_prior(const Vector& mu0, const Matrix& r, double a, double b);
// Full validation of an arbitrary (t, b, k, mu0, R) member.
PriorSpec make_custom_prior(double t, double b, int k, const Vector& mu0, const Matrix& r);

void validate_prior(const PriorSpec& prior, long p);

// Interval of admissible power parameters: a sub-interval of [0, 1] with closed upper end 1.
struct FeasibleSet {
    double lower = 0.0;
    bool lower_open = true;
    double upper = 1.0;
    bool upper_open = false;
    bool includes_zero = false;

    // Points within this distance of an open lower bound are rejected.
    static constexpr double kBoundaryGuard = 1e-9;

    bool contains(double delta) const;
};

FeasibleSet feasible_set(const PriorSpec& prior, long n0, long p);

// JSON prior config: {"kind": "reference" | "zellner" | "nig" | "custom", ...}.
// Zellner priors seed R from X'X of the dataset selected by "xtx_source" ("current" by default).
PriorSpec prior_from_json(const std::string& json_text, long p, const GaussianSuffStats* historical,
                          const GaussianSuffStats* current);

}  // namespace powerborrow
