#pragma once
// Dense, loop-based reference implementations used only by tests. They share
// no code path with the library beyond its data types.

#include "prmf/sparse_ratings.hpp"
#include "prmf/symmetric_sparse.hpp"
#include "prmf/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using Dense = Eigen::MatrixXd;

struct DenseRatings {
  Dense r;  // 0 where unobserved
  Dense w;  // indicator
};

inline DenseRatings densify(const prmf::SparseRatings& s) {
  DenseRatings d{Dense::Zero(s.num_users(), s.num_items()), Dense::Zero(s.num_users(), s.num_items())};
  for (const auto& t : s.triples()) {
    d.r(t.user, t.item) = t.value;
    d.w(t.user, t.item) = 1.0;
  }
  return d;
}

// 1/2 |W o (R - U V^T)|^2 + lambda_u/2 |U|^2 + lambda_v/2 |V|^2 via full matrices.
inline double pmf_objective(const DenseRatings& d, const Dense& u, const Dense& v, double lu, double lv) {
  const Dense resid = d.w.cwiseProduct(d.r - u * v.transpose());
  double s = 0.0;
  for (Eigen::Index i = 0; i < resid.rows(); ++i)
    for (Eigen::Index j = 0; j < resid.cols(); ++j) s += resid(i, j) * resid(i, j);
  double nu = 0.0, nv = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) nu += u.data()[i] * u.data()[i];
  for (Eigen::Index i = 0; i < v.size(); ++i) nv += v.data()[i] * v.data()[i];
  return 0.5 * s + 0.5 * lu * nu + 0.5 * lv * nv;
}

// log-determinant from eigenvalues (not Cholesky). NaN when not PD.
inline double log_det_eig(const Dense& a) {
  Eigen::SelfAdjointEigenSolver<Dense> eig(a, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()(i) <= 0) return std::nan("");
    s += std::log(eig.eigenvalues()(i));
  }
  return s;
}

inline double prmf_objective(const DenseRatings& d, const Dense& u, const Dense& v, const Dense& theta,
                             const Dense& sigma, double lu, double lv, double alpha, double beta, double gamma) {
  const auto m = u.rows();
  const double dim = double(u.cols());
  const Dense cov = u * u.transpose() + beta * sigma;
  const double tr = (theta * cov).trace();
  const double ld = log_det_eig(theta + (lu / alpha) * Dense::Identity(m, m));
  const double l1 = theta.cwiseAbs().sum();
  return pmf_objective(d, u, v, lu, lv) + 0.5 * alpha * (tr - (dim + beta) * ld + gamma * l1);
}

// Covariance over co-rated items by explicit item lookup tables.
inline double pair_covariance(const prmf::SparseRatings& s, int a, int b, int floor) {
  std::map<int, double> ra, rb;
  for (const auto& e : s.user_row(a)) ra[e.item] = e.value;
  for (const auto& e : s.user_row(b)) rb[e.item] = e.value;
  std::vector<double> xa, xb;
  for (const auto& [item, value] : ra)
    if (rb.count(item)) {
      xa.push_back(value);
      xb.push_back(rb[item]);
    }
  if (xa.empty() || int(xa.size()) < floor) return 0.0;
  double ma = 0, mb = 0;
  for (std::size_t t = 0; t < xa.size(); ++t) {
    ma += xa[t];
    mb += xb[t];
  }
  ma /= double(xa.size());
  mb /= double(xb.size());
  double c = 0.0;
  for (std::size_t t = 0; t < xa.size(); ++t) c += (xa[t] - ma) * (xb[t] - mb);
  return c / double(xa.size());
}

// Best PSD rank-d approximation from the general (non-symmetric) eigensolver.
inline Dense best_psd_rank(const Dense& s, int d) {
  Eigen::EigenSolver<Dense> es(s);
  const Eigen::VectorXd vals = es.eigenvalues().real();
  const Dense vecs = es.eigenvectors().real();
  std::vector<int> idx(std::size_t(vals.size()));
  for (int i = 0; i < int(idx.size()); ++i) idx[std::size_t(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals(a) > vals(b); });
  Dense out = Dense::Zero(s.rows(), s.cols());
  for (int c = 0; c < d; ++c) {
    const double lam = std::max(vals(idx[std::size_t(c)]), 0.0);
    const Eigen::VectorXd q = vecs.col(idx[std::size_t(c)]).normalized();
    out += lam * q * q.transpose();
  }
  return out;
}

// Latent objective with Theta dense: pmf part + alpha/2 tr(U^T Theta U).
inline double latent_objective(const DenseRatings& d, const Dense& u, const Dense& v, const Dense& theta, double lu,
                               double lv, double alpha) {
  return pmf_objective(d, u, v, lu, lv) + 0.5 * alpha * (u.transpose() * theta * u).trace();
}

// Elementwise soft threshold by explicit branches.
inline Dense soft(const Dense& a, double t) {
  Dense out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double x = a(i, j);
      out(i, j) = x > t ? x - t : (x < -t ? x + t : 0.0);
    }
  return out;
}

// Theta phase written out directly: explicit inverse of (C/rho + I), no Woodbury.
inline Dense theta_phase(const Dense& u, const Dense* x, double beta, double gamma, double lu, double alpha,
                         double rho, int k, const Dense& theta0) {
  const auto m = u.rows();
  const double dim = double(u.cols());
  Dense w;
  double tau;
  if (beta == 0) {
    w = u / std::sqrt(dim);
    tau = gamma / dim;
  } else {
    w.resize(m, u.cols() + x->cols());
    w << u / std::sqrt(dim + beta), std::sqrt(beta) * *x / std::sqrt(dim + beta);
    tau = gamma / (dim + beta);
  }
  const Dense c = w * w.transpose();
  const Dense e = Dense::Identity(m, m) - (lu / alpha) * c;
  const Dense p = (c / rho + Dense::Identity(m, m)).fullPivLu().inverse();
  Dense z = theta0, y = Dense::Zero(m, m), th;
  for (int t = 0; t < k; ++t) {
    th = soft(z - y, tau / rho);
    z = p * (e / rho + th + y);
    y = y + th - z;
  }
  Dense out(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      out(i, j) = std::abs(th(i, j)) <= std::abs(th(j, i)) ? th(i, j) : th(j, i);
  // The selection above is symmetric except for exact ties, where (i,j) with i<j wins.
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) out(j, i) = out(i, j);
  return out;
}

// Random ratings on an m x n grid with roughly `density` of cells observed.
inline prmf::SparseRatings random_ratings(int m, int n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> star(1, 5);
  std::vector<prmf::Rating> t;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (unif(rng) < density) t.push_back({i, j, double(star(rng))});
  return prmf::SparseRatings(m, n, std::move(t));
}

inline prmf::FactorMatrix random_factor(int rows, int cols, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, scale);
  prmf::FactorMatrix f(rows, cols);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = g(rng);
  return f;
}

inline Dense random_symmetric(int m, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, scale);
  Dense a(m, m);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return 0.5 * (a + a.transpose());
}

}  // namespace oracle
