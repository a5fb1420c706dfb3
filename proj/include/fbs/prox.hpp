#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "fbs/linop.hpp"

namespace fbs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Elementwise shrinkage (soft thresholding). Complex entries keep their
// phase; only the magnitude is thresholded.
// ---------------------------------------------------------------------------

inline double shrink_scalar(double z, double t) {
  const double m = std::abs(z) - t;
  return m > 0 ? (z > 0 ? m : -m) : 0.0;
}

inline cplx shrink_scalar(cplx z, double t) {
  const double m = std::abs(z);
  if (m <= t || m == 0.0) return cplx(0.0, 0.0);
  return z * ((m - t) / m);
}

template <class Scalar>
Vector<Scalar> shrink(const Vector<Scalar>& z, double t) {
  detail::require(t >= 0, "shrink: negative threshold");
  Vector<Scalar> out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = shrink_scalar(z[i], t);
  return out;
}

// ---------------------------------------------------------------------------
// Euclidean projection onto the l1 ball, by sort-and-threshold. Complex
// entries are treated through their magnitudes (phases preserved).
// ---------------------------------------------------------------------------

template <class Scalar>
Vector<Scalar> project_l1_ball(const Vector<Scalar>& z, double radius) {
  detail::require(radius > 0, "project_l1_ball: radius must be positive");
  Eigen::VectorXd mag = z.cwiseAbs();
  if (mag.sum() <= radius) return z;
  std::vector<double> s(mag.data(), mag.data() + mag.size());
  std::sort(s.begin(), s.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    cumsum += s[j];
    const double cand = (cumsum - radius) / static_cast<double>(j + 1);
    if (s[j] - cand > 0)
      theta = cand;
    else
      break;
  }
  return shrink(z, theta);
}

// prox of t*||.||_inf via the Moreau identity with the l1-ball projection.
template <class Scalar>
Vector<Scalar> prox_linf(const Vector<Scalar>& z, double t) {
  detail::require(t >= 0, "prox_linf: negative threshold");
  if (t == 0.0) return z;
  return z - project_l1_ball(z, t);
}

// Row-wise group shrinkage: each row scaled by max{||row||-t, 0}/||row||.
inline Eigen::MatrixXd group_row_shrink(const Eigen::MatrixXd& z, double t) {
  detail::require(t >= 0, "group_row_shrink: negative threshold");
  Eigen::MatrixXd out = z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double nrm = z.row(i).norm();
    out.row(i) *= nrm > 0 ? std::max(nrm - t, 0.0) / nrm : 0.0;
  }
  return out;
}

// Each row rescaled to Euclidean norm <= 1; zero rows unchanged.
inline Eigen::MatrixXd project_rows_unit_ball(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out = z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double nrm = z.row(i).norm();
    if (nrm > 1.0) out.row(i) /= nrm;
  }
  return out;
}

inline Eigen::VectorXd project_box(const Eigen::VectorXd& z, double lo, double hi) {
  detail::require(lo <= hi, "project_box: lo > hi");
  return z.cwiseMax(lo).cwiseMin(hi);
}

template <class Derived>
auto project_nonneg(const Eigen::MatrixBase<Derived>& z) {
  return z.cwiseMax(0.0).eval();
}

// ---------------------------------------------------------------------------
// Singular value / eigenvalue shrinkage.
// ---------------------------------------------------------------------------

template <class Scalar>
struct NuclearProxOut {
  Matrix<Scalar> x;
  double nuclear_norm = 0.0;  // of the output
};

template <class Scalar>
NuclearProxOut<Scalar> prox_nuclear_with_value(const Matrix<Scalar>& z, double t) {
  detail::require(t >= 0, "prox_nuclear: negative threshold");
  detail::require(z.allFinite(), "prox_nuclear: non-finite entries");
  Eigen::BDCSVD<Matrix<Scalar>> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  Eigen::VectorXd st = (s.array() - t).max(0.0);
  NuclearProxOut<Scalar> out;
  out.x = svd.matrixU() * st.asDiagonal() * svd.matrixV().adjoint();
  out.nuclear_norm = st.sum();
  return out;
}

template <class Scalar>
Matrix<Scalar> prox_nuclear(const Matrix<Scalar>& z, double t) {
  return prox_nuclear_with_value(z, t).x;
}

// Nuclear prox restricted to the PSD cone: eigenvalues mapped through
// max{lambda - t, 0}, which zeroes negative eigenvalues in the same pass.
// Asymmetry beyond 1e-10 is a caller bug, not data noise.
template <class Scalar>
NuclearProxOut<Scalar> prox_psd_nuclear_with_value(const Matrix<Scalar>& z, double t) {
  detail::require(t >= 0, "prox_psd_nuclear: negative threshold");
  detail::require(z.rows() == z.cols(), "prox_psd_nuclear: matrix not square");
  const double asym = (z - z.adjoint()).cwiseAbs().maxCoeff();
  detail::require(asym <= 1e-10, "prox_psd_nuclear: input not Hermitian");
  Matrix<Scalar> h = (z + Matrix<Scalar>(z.adjoint())) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(h);
  detail::require(es.info() == Eigen::Success, "prox_psd_nuclear: eigensolver failed");
  Eigen::VectorXd lam = (es.eigenvalues().array() - t).max(0.0);
  NuclearProxOut<Scalar> out;
  out.x = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
  out.nuclear_norm = lam.sum();
  return out;
}

template <class Scalar>
Matrix<Scalar> prox_psd_nuclear(const Matrix<Scalar>& z, double t) {
  return prox_psd_nuclear_with_value(z, t).x;
}

// ---------------------------------------------------------------------------
// ProxTerm: g together with its proximal map. prox returns g evaluated at
// the output as a byproduct, so objective recording costs nothing extra.
// ---------------------------------------------------------------------------

template <class Scalar>
struct ProxOut {
  Vector<Scalar> x;
  double g = 0.0;
};

template <class Scalar>
struct ProxTerm {
  double weight = 0.0;  // mu (0 for plain constraints)
  std::function<double(const Vector<Scalar>&)> value;
  std::function<ProxOut<Scalar>(const Vector<Scalar>&, double)> prox;
  // Elementwise-stepsize prox for separable g (diagonal preconditioning);
  // empty when g is not separable.
  std::function<Vector<Scalar>(const Vector<Scalar>&, const Eigen::VectorXd&)> prox_scaled;
};

template <class Scalar>
ProxTerm<Scalar> zero_prox() {
  ProxTerm<Scalar> p;
  p.value = [](const Vector<Scalar>&) { return 0.0; };
  p.prox = [](const Vector<Scalar>& z, double) { return ProxOut<Scalar>{z, 0.0}; };
  p.prox_scaled = [](const Vector<Scalar>& z, const Eigen::VectorXd&) { return z; };
  return p;
}

template <class Scalar>
ProxTerm<Scalar> l1_prox(double mu) {
  detail::require(mu >= 0, "l1_prox: negative weight");
  ProxTerm<Scalar> p;
  p.weight = mu;
  p.value = [mu](const Vector<Scalar>& x) { return mu * x.template lpNorm<1>(); };
  p.prox = [mu](const Vector<Scalar>& z, double tau) {
    Vector<Scalar> x = shrink(z, mu * tau);
    return ProxOut<Scalar>{x, mu * x.template lpNorm<1>()};
  };
  p.prox_scaled = [mu](const Vector<Scalar>& z, const Eigen::VectorXd& tau) {
    detail::require(z.size() == tau.size(), "l1_prox: stepsize vector size mismatch");
    Vector<Scalar> x(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) x[i] = shrink_scalar(z[i], mu * tau[i]);
    return x;
  };
  return p;
}

// Feasibility slack for characteristic functions; absorbs roundoff from
// exact projections.
inline constexpr double kFeasSlack = 1e-9;

template <class Scalar>
ProxTerm<Scalar> l1_ball_prox(double radius) {
  detail::require(radius > 0, "l1_ball_prox: radius must be positive");
  ProxTerm<Scalar> p;
  p.value = [radius](const Vector<Scalar>& x) {
    return x.template lpNorm<1>() <= radius * (1 + kFeasSlack) ? 0.0 : kInf;
  };
  p.prox = [radius](const Vector<Scalar>& z, double) {
    return ProxOut<Scalar>{project_l1_ball(z, radius), 0.0};
  };
  return p;
}

template <class Scalar>
ProxTerm<Scalar> linf_prox(double mu) {
  detail::require(mu >= 0, "linf_prox: negative weight");
  ProxTerm<Scalar> p;
  p.weight = mu;
  p.value = [mu](const Vector<Scalar>& x) {
    return x.size() ? mu * x.cwiseAbs().maxCoeff() : 0.0;
  };
  p.prox = [mu](const Vector<Scalar>& z, double tau) {
    Vector<Scalar> x = prox_linf(z, mu * tau);
    return ProxOut<Scalar>{x, x.size() ? mu * x.cwiseAbs().maxCoeff() : 0.0};
  };
  return p;
}

inline ProxTerm<double> row_group_prox(double mu, Eigen::Index rows, Eigen::Index cols) {
  detail::require(mu >= 0, "row_group_prox: negative weight");
  ProxTerm<double> p;
  p.weight = mu;
  auto row_norm_sum = [rows, cols](const Eigen::VectorXd& x) {
    Eigen::Map<const Eigen::MatrixXd> xm(x.data(), rows, cols);
    double s = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) s += xm.row(i).norm();
    return s;
  };
  p.value = [mu, row_norm_sum](const Eigen::VectorXd& x) { return mu * row_norm_sum(x); };
  p.prox = [mu, rows, cols, row_norm_sum](const Eigen::VectorXd& z, double tau) {
    Eigen::Map<const Eigen::MatrixXd> zm(z.data(), rows, cols);
    Eigen::MatrixXd x = group_row_shrink(zm, mu * tau);
    Eigen::VectorXd xv = Eigen::Map<Eigen::VectorXd>(x.data(), x.size());
    return ProxOut<double>{xv, mu * row_norm_sum(xv)};
  };
  return p;
}

template <class Scalar>
ProxTerm<Scalar> nuclear_prox(double mu, Eigen::Index rows, Eigen::Index cols) {
  detail::require(mu >= 0, "nuclear_prox: negative weight");
  ProxTerm<Scalar> p;
  p.weight = mu;
  p.value = [mu, rows, cols](const Vector<Scalar>& x) {
    Eigen::Map<const Matrix<Scalar>> xm(x.data(), rows, cols);
    Eigen::BDCSVD<Matrix<Scalar>> svd(xm);
    return mu * svd.singularValues().sum();
  };
  p.prox = [mu, rows, cols](const Vector<Scalar>& z, double tau) {
    Eigen::Map<const Matrix<Scalar>> zm(z.data(), rows, cols);
    NuclearProxOut<Scalar> r = prox_nuclear_with_value(Matrix<Scalar>(zm), mu * tau);
    Vector<Scalar> xv = Eigen::Map<Vector<Scalar>>(r.x.data(), r.x.size());
    return ProxOut<Scalar>{xv, mu * r.nuclear_norm};
  };
  return p;
}

// mu*||X||_* plus the PSD-cone constraint, fused in one spectral pass.
template <class Scalar>
ProxTerm<Scalar> psd_nuclear_prox(double mu, Eigen::Index n) {
  detail::require(mu >= 0, "psd_nuclear_prox: negative weight");
  ProxTerm<Scalar> p;
  p.weight = mu;
  p.value = [mu, n](const Vector<Scalar>& x) {
    Eigen::Map<const Matrix<Scalar>> xm(x.data(), n, n);
    const double asym = (xm - xm.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-10) return kInf;
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(
        Matrix<Scalar>((xm + Matrix<Scalar>(xm.adjoint())) / Scalar(2)));
    if (es.eigenvalues().minCoeff() < -kFeasSlack * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
      return kInf;
    return mu * es.eigenvalues().cwiseMax(0.0).sum();
  };
  p.prox = [mu, n](const Vector<Scalar>& z, double tau) {
    Eigen::Map<const Matrix<Scalar>> zm(z.data(), n, n);
    NuclearProxOut<Scalar> r = prox_psd_nuclear_with_value(Matrix<Scalar>(zm), mu * tau);
    Vector<Scalar> xv = Eigen::Map<Vector<Scalar>>(r.x.data(), r.x.size());
    return ProxOut<Scalar>{xv, mu * r.nuclear_norm};
  };
  return p;
}

inline ProxTerm<double> box_prox(double lo, double hi) {
  detail::require(lo <= hi, "box_prox: lo > hi");
  ProxTerm<double> p;
  const double slack = kFeasSlack * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  p.value = [lo, hi, slack](const Eigen::VectorXd& x) {
    return (x.minCoeff() >= lo - slack && x.maxCoeff() <= hi + slack) ? 0.0 : kInf;
  };
  p.prox = [lo, hi](const Eigen::VectorXd& z, double) {
    return ProxOut<double>{project_box(z, lo, hi), 0.0};
  };
  p.prox_scaled = [lo, hi](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return project_box(z, lo, hi);
  };
  return p;
}

inline ProxTerm<double> nonneg_prox() {
  ProxTerm<double> p;
  p.value = [](const Eigen::VectorXd& x) {
    return x.size() == 0 || x.minCoeff() >= -kFeasSlack ? 0.0 : kInf;
  };
  p.prox = [](const Eigen::VectorXd& z, double) {
    return ProxOut<double>{project_nonneg(z), 0.0};
  };
  p.prox_scaled = [](const Eigen::VectorXd& z, const Eigen::VectorXd&) {
    return project_nonneg(z);
  };
  return p;
}

// Constraint ||row_i|| <= 1 on the rows of the (rows x cols) unflattened
// iterate. With cols = 2 this is the per-pixel constraint on a 2-D field.
inline ProxTerm<double> rows_unit_ball_prox(Eigen::Index rows, Eigen::Index cols) {
  ProxTerm<double> p;
  p.value = [rows, cols](const Eigen::VectorXd& x) {
    Eigen::Map<const Eigen::MatrixXd> xm(x.data(), rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      if (xm.row(i).norm() > 1.0 + kFeasSlack) return kInf;
    return 0.0;
  };
  p.prox = [rows, cols](const Eigen::VectorXd& z, double) {
    Eigen::Map<const Eigen::MatrixXd> zm(z.data(), rows, cols);
    Eigen::MatrixXd x = project_rows_unit_ball(zm);
    return ProxOut<double>{Eigen::Map<Eigen::VectorXd>(x.data(), x.size()), 0.0};
  };
  return p;
}

// ---------------------------------------------------------------------------
// Brute-force prox oracle for low-dimensional checks: multi-resolution grid
// minimization of t*g(x) + 0.5*||x - z||^2_w. Independent of every closed
// form above.
// ---------------------------------------------------------------------------

inline Eigen::VectorXd prox_oracle(const std::function<double(const Eigen::VectorXd&)>& g,
                                   const Eigen::VectorXd& z, double t,
                                   const Eigen::VectorXd& weights = Eigen::VectorXd(),
                                   int grid_points = 33, int refinements = 14) {
  const Eigen::Index dim = z.size();
  detail::require(dim >= 1 && dim <= 3, "prox_oracle: dimension must be 1..3");
  Eigen::VectorXd w = weights.size() ? weights : Eigen::VectorXd::Ones(dim);
  detail::require(w.size() == dim, "prox_oracle: weight size mismatch");

  auto objective = [&](const Eigen::VectorXd& x) {
    const double gx = g(x);
    if (!std::isfinite(gx)) return kInf;
    return t * gx + 0.5 * (w.array() * (x - z).array().square()).sum();
  };

  Eigen::VectorXd lo(dim), hi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double margin = 0.25 * (1.0 + std::abs(z[i])) + t;
    lo[i] = std::min(z[i], 0.0) - margin;
    hi[i] = std::max(z[i], 0.0) + margin;
  }

  Eigen::VectorXd best = z;
  double best_val = objective(best);
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
  if (objective(zero) < best_val) {
    best = zero;
    best_val = objective(zero);
  }

  for (int level = 0; level < refinements; ++level) {
    Eigen::VectorXd step = (hi - lo) / static_cast<double>(grid_points - 1);
    Eigen::Vector3i idx = Eigen::Vector3i::Zero();
    const int n0 = grid_points;
    const int n1 = dim > 1 ? grid_points : 1;
    const int n2 = dim > 2 ? grid_points : 1;
    Eigen::VectorXd x(dim);
    for (idx[0] = 0; idx[0] < n0; ++idx[0])
      for (idx[1] = 0; idx[1] < n1; ++idx[1])
        for (idx[2] = 0; idx[2] < n2; ++idx[2]) {
          for (Eigen::Index d = 0; d < dim; ++d) x[d] = lo[d] + idx[static_cast<int>(d)] * step[d];
          const double val = objective(x);
          if (val < best_val) {
            best_val = val;
            best = x;
          }
        }
    // shrink the box around the incumbent
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double half = 1.5 * step[d];
      lo[d] = best[d] - half;
      hi[d] = best[d] + half;
    }
  }
  if (!std::isfinite(best_val))
    throw std::runtime_error("prox_oracle: grid never bracketed a finite value");
  return best;
}

}  // namespace fbs
