#include "powerborrow/prior_family.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace powerborrow {

double PriorSpec::log_normalizer(long p) const {
    if (!is_proper(p)) {
        throw Error(ErrorCode::InvalidHyperparameter, "only proper priors carry a normalizing constant");
    }
    const double a = t - 0.5 * static_cast<double>(p) - 1.0;
    return a * std::log(b) - boost::math::lgamma(a) - 0.5 * static_cast<double>(p) * kLogTwoPi +
           0.5 * chol_logdet(r);
}

void validate_prior(const PriorSpec& prior, long p) {
    if (p < 1) throw Error(ErrorCode::InvalidHyperparameter, "p must be positive");
    if (!(prior.t >= 0.0) || !std::isfinite(prior.t)) {
        throw Error(ErrorCode::InvalidHyperparameter, "t must be a finite non-negative number");
    }
    if (!(prior.b >= 0.0) || !std::isfinite(prior.b)) {
        throw Error(ErrorCode::InvalidHyperparameter, "b must be a finite non-negative number");
    }
    if (prior.k != 0 && prior.k != 1) throw Error(ErrorCode::InvalidHyperparameter, "k must be 0 or 1");
    if (prior.k == 1) {
        if (prior.mu0.size() != p) {
            throw Error(ErrorCode::ShapeMismatch, "mu0 has length " + std::to_string(prior.mu0.size()) +
                                                      ", expected " + std::to_string(p));
        }
        if (prior.r.rows() != p || prior.r.cols() != p) {
            throw Error(ErrorCode::ShapeMismatch, "R must be " + std::to_string(p) + "x" + std::to_string(p));
        }
        if (!prior.mu0.allFinite() || !prior.r.allFinite()) {
            throw Error(ErrorCode::InvalidHyperparameter, "mu0 and R must be finite");
        }
        if (!is_symmetric(prior.r, 1e-10)) throw Error(ErrorCode::NotPositiveDefinite, "R is not symmetric");
        SpdFactor check(prior.r);
    }
    if (prior.normalized_initial_prior && !prior.is_proper(p)) {
        throw Error(ErrorCode::InvalidHyperparameter,
                    "normalized_initial_prior requires a proper prior (t > 1 + p/2, b > 0, k = 1)");
    }
}

PriorSpec make_reference_prior(long p) {
    if (p < 1) throw Error(ErrorCode::InvalidHyperparameter, "p must be positive");
    PriorSpec prior;
    prior.t = 1.0;
    prior.b = 0.0;
    prior.k = 0;
    prior.label = "reference";
    return prior;
}

PriorSpec make_zellner_g_prior(double g, const Matrix& xtx, const Vector& mu0) {
    if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorCode::InvalidHyperparameter, "g must be positive");
    const long p = static_cast<long>(xtx.rows());
    PriorSpec prior;
    prior.t = 1.0 + 0.5 * static_cast<double>(p);
    prior.b = 0.0;
    prior.k = 1;
    prior.mu0 = mu0;
    prior.r = xtx / g;
    prior.label = "zellner";
    validate_prior(prior, p);
    return prior;
}

PriorSpec make_nig_prior(const Vector& mu0, const Matrix& r, double a, double b) {
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidHyperparameter, "a must be positive");
    if (!(b > 0.0) || !std::isfinite(b)) throw Error(ErrorCode::InvalidHyperparameter, "b must be positive");
    const long p = static_cast<long>(mu0.size());
    PriorSpec prior;
    prior.t = a + 0.5 * static_cast<double>(p) + 1.0;
    prior.b = b;
    prior.k = 1;
    prior.mu0 = mu0;
    prior.r = r;
    prior.label = "nig";
    validate_prior(prior, p);
    return prior;
}

PriorSpec make_custom_prior(double t, double b, int k, const Vector& mu0, const Matrix& r) {
    PriorSpec prior;
    prior.t = t;
    prior.b = b;
    prior.k = k;
    prior.mu0 = mu0;
    prior.r = r;
    prior.label = "custom";
    const long p = k == 1 ? static_cast<long>(mu0.size()) : std::max<long>(1, static_cast<long>(mu0.size()));
    validate_prior(prior, p);
    return prior;
}

bool FeasibleSet::contains(double delta) const {
    if (!(delta >= 0.0) || delta > upper) return false;
    if (delta == 0.0) return includes_zero;
    if (lower_open) return delta > lower + kBoundaryGuard;
    return delta >= lower;
}

FeasibleSet feasible_set(const PriorSpec& prior, long n0, long p) {
    if (p < 1) throw Error(ErrorCode::InvalidHyperparameter, "p must be positive");
    if (n0 <= p) {
        throw Error(ErrorCode::InsufficientHistoricalData,
                    "historical sample size n0=" + std::to_string(n0) + " must exceed p=" + std::to_string(p));
    }
    FeasibleSet set;
    set.lower = std::max(0.0, (2.0 - 2.0 * prior.t + static_cast<double>(p)) / static_cast<double>(n0));
    set.lower = std::min(set.lower, 1.0);
    set.includes_zero = prior.is_proper(p);
    set.lower_open = set.lower > 0.0 || !set.includes_zero;
    set.upper = 1.0;
    set.upper_open = false;
    return set;
}

namespace {

using nlohmann::json;

Vector vector_from_json(const json& node, long p, const char* name) {
    if (node.is_number()) return Vector::Constant(p, node.get<double>());
    if (!node.is_array() || static_cast<long>(node.size()) != p) {
        throw Error(ErrorCode::ShapeMismatch, std::string(name) + " must be a number or an array of length " +
                                                  std::to_string(p));
    }
    Vector v(p);
    for (long i = 0; i < p; ++i) v[i] = node.at(i).get<double>();
    return v;
}

// A number means a multiple of the identity; a flat array of length p means a diagonal.
Matrix matrix_from_json(const json& node, long p, const char* name) {
    if (node.is_number()) return Matrix::Identity(p, p) * node.get<double>();
    if (!node.is_array() || static_cast<long>(node.size()) != p) {
        throw Error(ErrorCode::ShapeMismatch, std::string(name) + " must be a number, a length-p diagonal or a " +
                                                  "p x p nested array");
    }
    if (node.at(0).is_number()) return vector_from_json(node, p, name).asDiagonal();
    Matrix m(p, p);
    for (long i = 0; i < p; ++i) {
        const auto& row = node.at(i);
        if (!row.is_array() || static_cast<long>(row.size()) != p) {
            throw Error(ErrorCode::ShapeMismatch, std::string(name) + " row " + std::to_string(i) + " has wrong length");
        }
        for (long j = 0; j < p; ++j) m(i, j) = row.at(j).get<double>();
    }
    return m;
}

}  // namespace

PriorSpec prior_from_json(const std::string& json_text, long p, const GaussianSuffStats* historical,
                          const GaussianSuffStats* current) {
    json cfg;
    try {
        cfg = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("prior JSON: ") + e.what());
    }
    if (!cfg.is_object() || !cfg.contains("kind")) {
        throw Error(ErrorCode::ParseError, "prior JSON must be an object with a \"kind\" field");
    }
    try {
        const auto kind = cfg.at("kind").get<std::string>();
        PriorSpec prior;
        if (kind == "reference") {
            prior = make_reference_prior(p);
        } else if (kind == "zellner") {
            const double g = cfg.at("g").get<double>();
            const auto source = cfg.value("xtx_source", std::string("current"));
            const GaussianSuffStats* seed = nullptr;
            if (source == "current") {
                seed = current;
            } else if (source == "historical") {
                seed = historical;
            } else {
                throw Error(ErrorCode::ParseError, "xtx_source must be \"current\" or \"historical\"");
            }
            Matrix xtx = seed != nullptr ? seed->xtx : Matrix::Identity(p, p);
            if (xtx.rows() != p) throw Error(ErrorCode::ShapeMismatch, "X'X dimension does not match p");
            const Vector mu0 = cfg.contains("mu0") ? vector_from_json(cfg.at("mu0"), p, "mu0") : Vector::Zero(p);
            prior = make_zellner_g_prior(g, xtx, mu0);
        } else if (kind == "nig") {
            const Vector mu0 = cfg.contains("mu0") ? vector_from_json(cfg.at("mu0"), p, "mu0") : Vector::Zero(p);
            const Matrix r = matrix_from_json(cfg.at("R"), p, "R");
            prior = make_nig_prior(mu0, r, cfg.at("a").get<double>(), cfg.at("b").get<double>());
        } else if (kind == "custom") {
            const int k = cfg.value("k", 0);
            const Vector mu0 = cfg.contains("mu0") ? vector_from_json(cfg.at("mu0"), p, "mu0") : Vector::Zero(p);
            const Matrix r = cfg.contains("R") ? matrix_from_json(cfg.at("R"), p, "R") : Matrix::Identity(p, p);
            prior = make_custom_prior(cfg.at("t").get<double>(), cfg.value("b", 0.0), k, mu0, r);
        } else {
            throw Error(ErrorCode::ParseError, "unknown prior kind '" + kind + "'");
        }
        if (cfg.contains("label")) prior.label = cfg.at("label").get<std::string>();
        prior.normalized_initial_prior = cfg.value("normalized", false);
        validate_prior(prior, p);
        return prior;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("prior JSON: ") + e.what());
    }
}

}  // namespace powerborrow
