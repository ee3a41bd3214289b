#include "doctest.h"
#include "oracles.hpp"

#include "prmf/errors.hpp"
#include "prmf/objective.hpp"
#include "prmf/sparse_ratings.hpp"
#include "prmf/symmetric_sparse.hpp"

#include <cmath>
#include <numeric>
#include <random>

using prmf::FactorMatrix;
using prmf::PrecisionMatrix;
using prmf::PriorCovariance;
using prmf::SparseRatings;

namespace {

FactorMatrix rows(std::initializer_list<std::initializer_list<double>> r) {
  FactorMatrix f(Eigen::Index(r.size()), Eigen::Index(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double x : row) f(i, j++) = x;
    ++i;
  }
  return f;
}

PrecisionMatrix sparse_of(const Eigen::MatrixXd& a) { return PrecisionMatrix::from_dense_upper(a); }

}  // namespace

TEST_CASE("predict is the inner product, clamped on request") {
  prmf::RowVector u(2), v(2);
  u << 1, 0;
  v << 0.5, 2;
  CHECK(prmf::predict(u, v) == doctest::Approx(0.5));

  u << 0, 0;
  v << 3, 3;
  CHECK(prmf::predict(u, v) == 0.0);
  CHECK(prmf::predict(u, v, prmf::RatingRange{1, 5}) == 1.0);

  u << 2, 1;
  v << 2, 2;
  CHECK(prmf::predict(u, v) == 6.0);
  CHECK(prmf::predict(u, v, prmf::RatingRange{1, 5}) == 5.0);
}

TEST_CASE("predict rejects mismatched lengths and bad ranges") {
  prmf::RowVector u(2), v(3);
  u.setOnes();
  v.setOnes();
  CHECK_THROWS_AS(prmf::predict(u, v), prmf::UsageError);
  prmf::RowVector w(2);
  w.setOnes();
  CHECK_THROWS_AS(prmf::predict(u, w, prmf::RatingRange{5, 1}), prmf::UsageError);
}

TEST_CASE("predict is linear in each argument before clamping") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    prmf::RowVector u(4), v(4);
    for (int k = 0; k < 4; ++k) {
      u(k) = g(rng);
      v(k) = g(rng);
    }
    const double a = g(rng);
    CHECK(prmf::predict(prmf::RowVector(a * u), v) == doctest::Approx(a * prmf::predict(u, v)).epsilon(1e-12));
  }
}

TEST_CASE("pmf objective small cases") {
  SparseRatings one(1, 1, {{0, 0, 3.0}});
  FactorMatrix z = FactorMatrix::Zero(1, 2);
  CHECK(prmf::pmf_objective(one, z, z, 0, 0) == doctest::Approx(4.5));

  SparseRatings none(1, 0, {});
  FactorMatrix u = rows({{1, 1}});
  FactorMatrix v(0, 2);
  CHECK(prmf::pmf_objective(none, u, v, 2, 0) == doctest::Approx(2.0));
}

TEST_CASE("pmf objective matches the dense loop on random instances") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 25; ++t) {
    auto r = oracle::random_ratings(5, 5, 0.5, rng);
    auto u = oracle::random_factor(5, 3, 1.0, rng);
    auto v = oracle::random_factor(5, 3, 1.0, rng);
    const auto d = oracle::densify(r);
    CHECK(prmf::pmf_objective(r, u, v, 0.3, 0.7) ==
          doctest::Approx(oracle::pmf_objective(d, u, v, 0.3, 0.7)).epsilon(1e-12));
  }
}

TEST_CASE("prmf objective on a 1x1 model") {
  SparseRatings r(1, 1, {{0, 0, 2.0}});
  FactorMatrix u = FactorMatrix::Zero(1, 1);
  FactorMatrix v = FactorMatrix::Zero(1, 1);
  prmf::HyperParams p;
  p.d = 1;
  p.alpha = 0.5;
  p.lambda_u = 0.5;  // lambda_u / alpha = 1
  p.lambda_v = 0.0;
  p.beta = 0;
  p.gamma = 0;
  const PrecisionMatrix theta = PrecisionMatrix::identity(1);
  const double expected = 2.0 + 0.5 * 0.5 * (0 - 1 * std::log(2.0));
  CHECK(prmf::prmf_objective(r, u, v, theta, PriorCovariance{}, p) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("empty theta reduces to pmf plus the diagonal log term") {
  std::mt19937_64 rng(3);
  auto r = oracle::random_ratings(4, 6, 0.5, rng);
  auto u = oracle::random_factor(4, 2, 1.0, rng);
  auto v = oracle::random_factor(6, 2, 1.0, rng);
  prmf::HyperParams p;
  p.d = 2;
  p.alpha = 0.25;
  p.lambda_u = 0.1;
  p.lambda_v = 0.2;
  p.gamma = 0;
  const PrecisionMatrix theta(4, {});
  const double pmf = prmf::pmf_objective(r, u, v, p.lambda_u, p.lambda_v);
  const double expected = pmf - 0.5 * p.alpha * p.d * 4 * std::log(p.lambda_u / p.alpha);
  CHECK(prmf::prmf_objective(r, u, v, theta, PriorCovariance{}, p) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("prmf objective matches the dense oracle") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    auto r = oracle::random_ratings(5, 6, 0.5, rng);
    auto u = oracle::random_factor(5, 3, 1.0, rng);
    auto v = oracle::random_factor(6, 3, 1.0, rng);
    // diagonally dominant so Theta + (lambda_u/alpha) I is PD
    Eigen::MatrixXd th = oracle::random_symmetric(5, 0.2, rng);
    th.diagonal().array() += 1.5;
    const Eigen::MatrixXd sig = oracle::random_symmetric(5, 1.0, rng);
    prmf::HyperParams p;
    p.d = 3;
    p.alpha = 0.7;
    p.beta = 2.0;
    p.gamma = 0.3;
    p.lambda_u = 0.05;
    p.lambda_v = 0.02;
    const double got = prmf::prmf_objective(r, u, v, sparse_of(th), sparse_of(sig), p);
    const double want =
        oracle::prmf_objective(oracle::densify(r), u, v, th, sig, p.lambda_u, p.lambda_v, p.alpha, p.beta, p.gamma);
    CHECK(got == doctest::Approx(want).epsilon(1e-11));
  }
}

TEST_CASE("objective terms decompose and scale") {
  std::mt19937_64 rng(9);
  auto r = oracle::random_ratings(5, 5, 0.6, rng);
  auto u = oracle::random_factor(5, 2, 1.0, rng);
  auto v = oracle::random_factor(5, 2, 1.0, rng);
  Eigen::MatrixXd th = oracle::random_symmetric(5, 0.1, rng);
  th.diagonal().array() += 1.0;
  prmf::HyperParams p;
  p.d = 2;
  p.alpha = 0.5;
  p.gamma = 0.7;
  p.lambda_u = 0.1;
  p.lambda_v = 0.3;
  const auto terms = prmf::prmf_objective_terms(r, u, v, sparse_of(th), PriorCovariance{}, p);
  CHECK(terms.data + terms.regularizer ==
        doctest::Approx(prmf::pmf_objective(r, u, v, p.lambda_u, p.lambda_v)).epsilon(1e-13));

  const auto doubled = prmf::prmf_objective_terms(r, u, v, sparse_of(2.0 * th), PriorCovariance{}, p);
  CHECK(doubled.l1 == 2.0 * terms.l1);
  CHECK(0.5 * p.alpha * p.gamma * doubled.l1 == 2.0 * (0.5 * p.alpha * p.gamma * terms.l1));
}

TEST_CASE("prmf objective is invariant under a user permutation") {
  std::mt19937_64 rng(13);
  const int m = 5, n = 4, d = 2;
  auto r = oracle::random_ratings(m, n, 0.6, rng);
  auto u = oracle::random_factor(m, d, 1.0, rng);
  auto v = oracle::random_factor(n, d, 1.0, rng);
  Eigen::MatrixXd th = oracle::random_symmetric(m, 0.2, rng);
  th.diagonal().array() += 1.5;
  Eigen::MatrixXd sig = oracle::random_symmetric(m, 1.0, rng);
  prmf::HyperParams p;
  p.d = d;
  p.alpha = 0.3;
  p.beta = 1.0;
  p.gamma = 0.2;
  p.lambda_u = 0.1;
  p.lambda_v = 0.1;

  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<prmf::Rating> t;
  for (const auto& x : r.triples()) t.push_back({perm[std::size_t(x.user)], x.item, x.value});
  FactorMatrix up(m, d);
  Eigen::MatrixXd thp(m, m), sigp(m, m);
  for (int i = 0; i < m; ++i) {
    up.row(perm[std::size_t(i)]) = u.row(i);
    for (int k = 0; k < m; ++k) {
      thp(perm[std::size_t(i)], perm[std::size_t(k)]) = th(i, k);
      sigp(perm[std::size_t(i)], perm[std::size_t(k)]) = sig(i, k);
    }
  }
  const double a = prmf::prmf_objective(r, u, v, sparse_of(th), sparse_of(sig), p);
  const double b = prmf::prmf_objective(SparseRatings(m, n, std::move(t)), up, v, sparse_of(thp), sparse_of(sigp), p);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("log determinant fails loudly off the PD cone") {
  Eigen::MatrixXd th(2, 2);
  th << -2, 0, 0, 1;
  CHECK_THROWS_AS(prmf::shifted_log_det(sparse_of(th), 1.0), prmf::NumericError);
  CHECK(prmf::shifted_log_det(sparse_of(th), 3.0) == doctest::Approx(std::log(1.0 * 4.0)));
}

TEST_CASE("latent objective adds the coupling trace") {
  std::mt19937_64 rng(17);
  auto r = oracle::random_ratings(4, 4, 0.7, rng);
  auto u = oracle::random_factor(4, 2, 1.0, rng);
  auto v = oracle::random_factor(4, 2, 1.0, rng);
  Eigen::MatrixXd th = oracle::random_symmetric(4, 1.0, rng);
  const double got = prmf::latent_objective(r, u, v, sparse_of(th), 0.1, 0.2, 0.4);
  CHECK(got == doctest::Approx(oracle::latent_objective(oracle::densify(r), u, v, th, 0.1, 0.2, 0.4)).epsilon(1e-12));
}

TEST_CASE("sparse ratings validation") {
  CHECK_THROWS_AS(SparseRatings(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), prmf::UsageError);
  CHECK_THROWS_AS(SparseRatings(2, 2, {{2, 0, 1.0}}), prmf::UsageError);
  CHECK_THROWS_AS(SparseRatings(2, 2, {{0, 0, std::nan("")}}), prmf::UsageError);
  SparseRatings r(3, 3, {{2, 1, 4.0}, {0, 2, 1.0}, {2, 0, 3.0}});
  CHECK(r.consistent());
  CHECK(r.user_count(2) == 2);
  CHECK(r.user_row(2)[0].item == 0);
  CHECK(r.user_row(2)[1].item == 1);
  CHECK(r.user_count(1) == 0);
  CHECK(r.item_count(0) == 1);
  CHECK(r.mean() == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("symmetric sparse storage") {
  using S = prmf::SymmetricSparse<double>;
  CHECK_THROWS_AS(S(2, {{0, 1, 1.0}, {1, 0, 2.0}}), prmf::UsageError);
  S s(3, {{1, 0, 2.0}, {2, 2, -1.0}, {0, 2, 0.0}});
  CHECK(s.coeff(0, 1) == 2.0);
  CHECK(s.coeff(1, 0) == 2.0);
  CHECK(s.coeff(0, 2) == 0.0);
  CHECK(s.nonzeros() == 3);
  CHECK(s.sparsity() == doctest::Approx(6.0 / 9.0));
  CHECK(s.l1_norm() == doctest::Approx(5.0));
  const Eigen::MatrixXd d = s.to_dense();
  CHECK(d == d.transpose());

  std::mt19937_64 rng(23);
  for (int dim : {3, 5, 10, 20}) {
    Eigen::MatrixXd a = oracle::random_symmetric(9, 1.0, rng);
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (std::abs(a.data()[i]) < 0.5) a.data()[i] = 0;
    a = Eigen::MatrixXd(a.triangularView<Eigen::Upper>()) + Eigen::MatrixXd(a.triangularView<Eigen::StrictlyUpper>()).transpose();
    const auto sp = S::from_dense_upper(a);
    const FactorMatrix f = oracle::random_factor(9, dim, 1.0, rng);
    for (int i = 0; i < 9; ++i) {
      prmf::RowVector out(dim);
      sp.row_times(i, f, out.data());
      CHECK((out - a.row(i) * f).norm() < 1e-12);
    }
  }
}
