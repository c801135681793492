#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <string>

#include "powerborrow/error.hpp"

namespace powerborrow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kLogTwoPi = 1.83787706640934548356;

// D = (X, Y). No intercept is inserted; callers supply it as a column of ones.
struct Dataset {
    Matrix x;
    Vector y;

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }
};

// Sufficient statistics of a dataset under Y = X beta + eps.
struct GaussianSuffStats {
    Matrix xtx;
    Vector xty;
    Vector beta_hat;
    double s = 0.0;  // residual sum of squares
    long n = 0;
    long p = 0;

    // Y'Y reconstructed as S + beta_hat' X'Y.
    double yty() const { return s + beta_hat.dot(xty); }
};

GaussianSuffStats sufficient_stats(const Dataset& data);

// Intercept-only statistics from (n, mean, sample sd).
GaussianSuffStats stats_from_summary(long n, double ybar, double s_sd);

// Statistics of the row-stacked dataset (X; X0), (Y; Y0).
GaussianSuffStats pool_stats(const GaussianSuffStats& a, const GaussianSuffStats& b);

// Cholesky of an SPD matrix; throws NotPositiveDefinite when factorization fails.
class SpdFactor {
public:
    explicit SpdFactor(const Matrix& m);

    double logdet() const;
    Vector solve(const Vector& rhs) const;
    Matrix solve(const Matrix& rhs) const;
    // v' M^{-1} v
    double inv_quadratic(const Vector& v) const;
    // L with M = L L'
    Matrix lower() const { return llt_.matrixL(); }
    Eigen::Index dim() const { return llt_.rows(); }

private:
    Eigen::LLT<Matrix> llt_;
};

double chol_logdet(const Matrix& m);

bool is_symmetric(const Matrix& m, double rel_tol = 1e-12);

// Header row; column "y" is the response; every other column is a covariate in file order.
Dataset read_dataset_csv(const std::string& path);
Dataset parse_dataset_csv(const std::string& text);

}  // namespace powerborrow
