#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "powerborrow/model_core.hpp"
#include "support.hpp"

using namespace powerborrow;
using pbtest::rel_err;

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

}  // namespace

TEST_CASE("sufficient_stats on an intercept-only design") {
    Dataset flat{Matrix::Ones(4, 1), Vector::Ones(4)};
    const auto s = sufficient_stats(flat);
    CHECK(s.beta_hat[0] == doctest::Approx(1.0));
    CHECK(s.s == doctest::Approx(0.0));
    CHECK(s.n == 4);
    CHECK(s.p == 1);

    Dataset two{Matrix::Ones(2, 1), Vector(2)};
    two.y << 0.0, 2.0;
    const auto t = sufficient_stats(two);
    CHECK(t.beta_hat[0] == doctest::Approx(1.0));
    CHECK(t.s == doctest::Approx(2.0));
}

TEST_CASE("sufficient_stats matches an explicit normal-equations solve") {
    Vector beta(4);
    beta << 0.5, -1.0, 2.0, 0.25;
    const auto d = pbtest::random_dataset(20, beta, 0.7, 11);
    const auto s = sufficient_stats(d);
    const Matrix xtx_inv = (d.x.transpose() * d.x).inverse();
    const Vector bh = xtx_inv * d.x.transpose() * d.y;
    const double rss = (d.y - d.x * bh).squaredNorm();
    for (int j = 0; j < 4; ++j) CHECK(rel_err(s.beta_hat[j], bh[j]) < 1e-10);
    CHECK(rel_err(s.s, rss) < 1e-10);
    CHECK(rel_err(s.s, d.y.squaredNorm() - s.beta_hat.dot(s.xty)) < 1e-10);
    CHECK(rel_err(s.yty(), d.y.squaredNorm()) < 1e-12);
}

TEST_CASE("sufficient_stats errors") {
    Dataset bad{Matrix::Ones(4, 1), Vector::Ones(3)};
    CHECK(code_of([&] { sufficient_stats(bad); }) == ErrorCode::ShapeMismatch);
    Dataset collinear{Matrix(5, 2), Vector::Ones(5)};
    collinear.x.col(0).setOnes();
    collinear.x.col(1).setConstant(2.0);
    CHECK(code_of([&] { sufficient_stats(collinear); }) == ErrorCode::SingularDesign);
    Dataset short_data{Matrix::Ones(2, 2), Vector::Ones(2)};
    short_data.x(1, 1) = 3.0;
    CHECK(code_of([&] { sufficient_stats(short_data); }) == ErrorCode::SingularDesign);
}

TEST_CASE("residual sum of squares vanishes exactly on the column space") {
    Vector beta(3);
    beta << 1.0, 2.0, -3.0;
    auto d = pbtest::random_dataset(15, beta, 0.0, 5);
    const auto s = sufficient_stats(d);
    CHECK(s.s >= 0.0);
    CHECK(s.s < 1e-20 * std::max(1.0, d.y.squaredNorm()) + 1e-24);
    d = pbtest::random_dataset(15, beta, 1.0, 5);
    CHECK(sufficient_stats(d).s > 1e-3);
}

TEST_CASE("sufficient_stats is invariant to row permutation") {
    Vector beta(3);
    beta << 1.0, 0.3, -0.6;
    const auto d = pbtest::random_dataset(25, beta, 0.9, 17);
    std::vector<int> idx(25);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(3);
    std::shuffle(idx.begin(), idx.end(), rng);
    Dataset perm{Matrix(25, 3), Vector(25)};
    for (int i = 0; i < 25; ++i) {
        perm.x.row(i) = d.x.row(idx[i]);
        perm.y[i] = d.y[idx[i]];
    }
    const auto a = sufficient_stats(d);
    const auto b = sufficient_stats(perm);
    CHECK(rel_err(b.s, a.s) < 1e-12);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(b.beta_hat[j] - a.beta_hat[j]) < 1e-12 * (1 + std::abs(a.beta_hat[j])));
    CHECK((b.xtx - a.xtx).cwiseAbs().maxCoeff() < 1e-12 * a.xtx.cwiseAbs().maxCoeff());
}

TEST_CASE("stats_from_summary") {
    const auto a = stats_from_summary(10, 0.0, 0.5);
    CHECK(a.xtx(0, 0) == 10.0);
    CHECK(a.beta_hat[0] == 0.0);
    CHECK(a.s == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(stats_from_summary(2, 5.0, 1.0).s == doctest::Approx(1.0));
    const auto c = stats_from_summary(10, 1.5, 0.5);
    CHECK(c.beta_hat[0] == 1.5);
    CHECK(c.s == doctest::Approx(2.25).epsilon(1e-14));
    CHECK(c.xty[0] == doctest::Approx(15.0));
    CHECK(code_of([] { stats_from_summary(1, 0.0, 1.0); }) == ErrorCode::InvalidSummary);
    CHECK(code_of([] { stats_from_summary(10, 0.0, 0.0); }) == ErrorCode::InvalidSummary);
    CHECK(code_of([] { stats_from_summary(10, 0.0, -1.0); }) == ErrorCode::InvalidSummary);
}

TEST_CASE("summary stats agree with raw data having the same mean and sd") {
    Dataset d{Matrix::Ones(5, 1), Vector(5)};
    d.y << 1.0, 2.0, 4.0, 7.0, 11.0;
    const double mean = d.y.mean();
    const double sd = std::sqrt((d.y.array() - mean).square().sum() / 4.0);
    const auto a = sufficient_stats(d);
    const auto b = stats_from_summary(5, mean, sd);
    CHECK(rel_err(b.s, a.s) < 1e-12);
    CHECK(rel_err(b.xty[0], a.xty[0]) < 1e-12);
    CHECK(rel_err(b.yty(), a.yty()) < 1e-12);
}

TEST_CASE("pool_stats equals stats of the stacked data") {
    Vector beta(2);
    beta << 1.0, -2.0;
    const auto a = pbtest::random_dataset(12, beta, 0.5, 1);
    const auto b = pbtest::random_dataset(9, beta, 0.5, 2);
    const auto pooled = pool_stats(sufficient_stats(a), sufficient_stats(b));
    const auto direct = sufficient_stats(pbtest::stack(a, b));
    CHECK(pooled.n == 21);
    CHECK(rel_err(pooled.s, direct.s) < 1e-10);
    for (int j = 0; j < 2; ++j) CHECK(rel_err(pooled.beta_hat[j], direct.beta_hat[j]) < 1e-10);
}

TEST_CASE("chol_logdet") {
    CHECK(chol_logdet(Matrix::Identity(3, 3)) == doctest::Approx(0.0));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 8.0;
    CHECK(chol_logdet(d) == doctest::Approx(std::log(16.0)).epsilon(1e-15));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Matrix m = pbtest::random_spd(5, seed);
        CHECK(rel_err(chol_logdet(m), pbtest::eigen_logdet(m)) < 1e-10);
        CHECK(std::abs(chol_logdet(m) + chol_logdet(m.inverse())) < 1e-8);
    }
    Matrix indefinite = Matrix::Identity(2, 2);
    indefinite(1, 1) = -1.0;
    CHECK(code_of([&] { chol_logdet(indefinite); }) == ErrorCode::NotPositiveDefinite);
    Matrix asym = Matrix::Identity(2, 2);
    asym(0, 1) = 0.5;
    CHECK(code_of([&] { chol_logdet(asym); }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("SpdFactor solves and quadratic forms") {
    const Matrix m = pbtest::random_spd(4, 42);
    const SpdFactor f(m);
    Vector v(4);
    v << 1.0, -2.0, 0.5, 3.0;
    const Vector x = f.solve(v);
    CHECK((m * x - v).norm() < 1e-12 * v.norm() * m.norm());
    CHECK(rel_err(f.inv_quadratic(v), v.dot(m.inverse() * v)) < 1e-12);
    const Matrix l = f.lower();
    CHECK((l * l.transpose() - m).cwiseAbs().maxCoeff() < 1e-12 * m.cwiseAbs().maxCoeff());
}

TEST_CASE("dataset CSV parsing") {
    const auto d = parse_dataset_csv("x0,x1,y\n1,0.5,2\n1,1.5,3.5\n1,2,4\n");
    CHECK(d.x.rows() == 3);
    CHECK(d.x.cols() == 2);
    CHECK(d.x(1, 1) == 1.5);
    CHECK(d.y[2] == 4.0);
    const auto yfirst = parse_dataset_csv("y,a\n1,2\n3,4\n");
    CHECK(yfirst.x(1, 0) == 4.0);
    CHECK(yfirst.y[1] == 3.0);
    CHECK(code_of([] { parse_dataset_csv("a,b\n1,2\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_dataset_csv("a,y\n1,2\n3\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_dataset_csv("a,y\n1,abc\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { read_dataset_csv("/nonexistent/powerborrow.csv"); }) == ErrorCode::IoError);
}
