#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "fbs/rng.hpp"

namespace fbs {

using cplx = std::complex<double>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

// Shape metadata for flattened (column-major) iterates. Vectors are {n, 1}.
struct Shape {
  Eigen::Index rows = 0;
  Eigen::Index cols = 1;
  Eigen::Index size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

// A linear operator given by an apply/adjoint pair over flattened elements.
// Immutable after construction; safe to share across concurrent solves.
template <class Scalar>
struct LinearMap {
  Shape domain;
  Shape range;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> apply;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> adjoint;
};

namespace detail {
inline void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}
}  // namespace detail

template <class Scalar>
LinearMap<Scalar> identity_map(Shape shape) {
  LinearMap<Scalar> m;
  m.domain = shape;
  m.range = shape;
  auto pass = [n = shape.size()](const Vector<Scalar>& x) {
    detail::require(x.size() == n, "identity_map: size mismatch");
    return x;
  };
  m.apply = pass;
  m.adjoint = pass;
  return m;
}

// Matrix-vector product map; adjoint is the conjugate transpose.
template <class Scalar>
LinearMap<Scalar> dense_map(const Matrix<Scalar>& a) {
  detail::require(a.allFinite(), "dense_map: matrix has non-finite entries");
  LinearMap<Scalar> m;
  m.domain = {a.cols(), 1};
  m.range = {a.rows(), 1};
  m.apply = [a](const Vector<Scalar>& x) -> Vector<Scalar> {
    detail::require(x.size() == a.cols(), "dense_map: apply size mismatch");
    return a * x;
  };
  m.adjoint = [a](const Vector<Scalar>& y) -> Vector<Scalar> {
    detail::require(y.size() == a.rows(), "dense_map: adjoint size mismatch");
    return a.adjoint() * y;
  };
  return m;
}

// Left-multiplication X -> A*X on column-major flattened matrices with
// `cols` columns (the MMV data term).
template <class Scalar>
LinearMap<Scalar> matrix_product_map(const Matrix<Scalar>& a, Eigen::Index cols) {
  detail::require(a.allFinite(), "matrix_product_map: non-finite entries");
  LinearMap<Scalar> m;
  m.domain = {a.cols(), cols};
  m.range = {a.rows(), cols};
  m.apply = [a, cols](const Vector<Scalar>& x) -> Vector<Scalar> {
    detail::require(x.size() == a.cols() * cols, "matrix_product_map: size mismatch");
    Eigen::Map<const Matrix<Scalar>> xm(x.data(), a.cols(), cols);
    Matrix<Scalar> y = a * xm;
    return Eigen::Map<Vector<Scalar>>(y.data(), y.size());
  };
  m.adjoint = [a, cols](const Vector<Scalar>& y) -> Vector<Scalar> {
    detail::require(y.size() == a.rows() * cols, "matrix_product_map: size mismatch");
    Eigen::Map<const Matrix<Scalar>> ym(y.data(), a.rows(), cols);
    Matrix<Scalar> x = a.adjoint() * ym;
    return Eigen::Map<Vector<Scalar>>(x.data(), x.size());
  };
  return m;
}

// Selected rows of the unitary N-point DFT. The adjoint embeds into the
// full spectrum and inverse-transforms. One transform per call, no plans
// are kept.
inline LinearMap<cplx> subsampled_dft_map(std::vector<Eigen::Index> row_indices,
                                          Eigen::Index n) {
  detail::require(n >= 1, "subsampled_dft_map: N must be positive");
  std::unordered_set<Eigen::Index> seen;
  for (Eigen::Index r : row_indices) {
    detail::require(r >= 0 && r < n, "subsampled_dft_map: row index out of range");
    detail::require(seen.insert(r).second, "subsampled_dft_map: duplicate row index");
  }
  const Eigen::Index m = static_cast<Eigen::Index>(row_indices.size());
  detail::require(m >= 1, "subsampled_dft_map: empty row set");
  const double root_n = std::sqrt(static_cast<double>(n));

  LinearMap<cplx> map;
  map.domain = {n, 1};
  map.range = {m, 1};
  map.apply = [row_indices, n, m, root_n](const Vector<cplx>& x) -> Vector<cplx> {
    detail::require(x.size() == n, "subsampled_dft_map: apply size mismatch");
    Eigen::FFT<double> fft;
    Vector<cplx> full(n);
    Vector<cplx> in = x;
    fft.fwd(full, in);
    Vector<cplx> out(m);
    for (Eigen::Index i = 0; i < m; ++i) out[i] = full[row_indices[static_cast<std::size_t>(i)]] / root_n;
    return out;
  };
  map.adjoint = [row_indices, n, m, root_n](const Vector<cplx>& y) -> Vector<cplx> {
    detail::require(y.size() == m, "subsampled_dft_map: adjoint size mismatch");
    Eigen::FFT<double> fft;
    Vector<cplx> full = Vector<cplx>::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) full[row_indices[static_cast<std::size_t>(i)]] = y[i];
    Vector<cplx> out(n);
    fft.inv(out, full);  // includes the 1/N factor
    return out * root_n;
  };
  return map;
}

// Discrete 2-D gradient field: r(i,j) = u(i+1,j)-u(i,j), c(i,j) = u(i,j+1)-u(i,j),
// with zero differences past the last row/column.
struct VectorField2D {
  Eigen::MatrixXd r;
  Eigen::MatrixXd c;
  Eigen::Index rows() const { return r.rows(); }
  Eigen::Index cols() const { return r.cols(); }
};

inline VectorField2D grad2d(const Eigen::MatrixXd& u) {
  const Eigen::Index rows = u.rows(), cols = u.cols();
  detail::require(rows >= 1 && cols >= 1, "grad2d: empty image");
  VectorField2D g;
  g.r = Eigen::MatrixXd::Zero(rows, cols);
  g.c = Eigen::MatrixXd::Zero(rows, cols);
  if (rows > 1) g.r.topRows(rows - 1) = u.bottomRows(rows - 1) - u.topRows(rows - 1);
  if (cols > 1) g.c.leftCols(cols - 1) = u.rightCols(cols - 1) - u.leftCols(cols - 1);
  return g;
}

// Discrete divergence, the exact negative adjoint of grad2d. Field entries
// in the structurally-zero slots (last row of r, last column of c) do not
// contribute; they lie outside the range of grad2d.
inline Eigen::MatrixXd div2d(const VectorField2D& x) {
  const Eigen::Index rows = x.r.rows(), cols = x.r.cols();
  detail::require(x.c.rows() == rows && x.c.cols() == cols,
                  "div2d: field components differ in shape");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
  if (rows > 1) {
    d.topRows(rows - 1) += x.r.topRows(rows - 1);
    d.bottomRows(rows - 1) -= x.r.topRows(rows - 1);
  }
  if (cols > 1) {
    d.leftCols(cols - 1) += x.c.leftCols(cols - 1);
    d.rightCols(cols - 1) -= x.c.leftCols(cols - 1);
  }
  return d;
}

// Flattened layout of a field: [vec(r); vec(c)], so a length-2RC vector
// reinterpreted as an (RC)x2 column-major matrix has per-pixel 2-vectors
// as rows.
inline Eigen::VectorXd flatten_field(const VectorField2D& x) {
  const Eigen::Index n = x.r.size();
  Eigen::VectorXd v(2 * n);
  v.head(n) = Eigen::Map<const Eigen::VectorXd>(x.r.data(), n);
  v.tail(n) = Eigen::Map<const Eigen::VectorXd>(x.c.data(), n);
  return v;
}

inline VectorField2D unflatten_field(const Eigen::VectorXd& v, Eigen::Index rows,
                                     Eigen::Index cols) {
  const Eigen::Index n = rows * cols;
  detail::require(v.size() == 2 * n, "unflatten_field: size mismatch");
  VectorField2D x;
  x.r = Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
  x.c = Eigen::Map<const Eigen::MatrixXd>(v.data() + n, rows, cols);
  return x;
}

// Divergence as a LinearMap from flattened fields to flattened images.
// adjoint = -grad2d.
inline LinearMap<double> divergence_map(Eigen::Index rows, Eigen::Index cols) {
  LinearMap<double> m;
  m.domain = {rows * cols, 2};
  m.range = {rows, cols};
  m.apply = [rows, cols](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::MatrixXd d = div2d(unflatten_field(v, rows, cols));
    return Eigen::Map<Eigen::VectorXd>(d.data(), d.size());
  };
  m.adjoint = [rows, cols](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    detail::require(u.size() == rows * cols, "divergence_map: adjoint size mismatch");
    Eigen::Map<const Eigen::MatrixXd> um(u.data(), rows, cols);
    VectorField2D g = grad2d(um);
    return -flatten_field(g);
  };
  return m;
}

namespace detail {
template <class Scalar>
Vector<Scalar> gaussian_like(Rng& rng, Eigen::Index n) {
  if constexpr (is_complex_v<Scalar>) {
    return crandn_vector(rng, n);
  } else {
    return randn_vector(rng, n);
  }
}
}  // namespace detail

// Secant-based Lipschitz estimate from two Gaussian probe points.
template <class Scalar>
double estimate_lipschitz(const std::function<Vector<Scalar>(const Vector<Scalar>&)>& grad,
                          Eigen::Index dim, Rng& rng) {
  constexpr int kMaxRetries = 10;
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    Vector<Scalar> x1 = detail::gaussian_like<Scalar>(rng, dim);
    Vector<Scalar> x2 = detail::gaussian_like<Scalar>(rng, dim);
    const double denom = (x2 - x1).norm();
    if (denom < 1e-300) continue;
    return (grad(x2) - grad(x1)).norm() / denom;
  }
  throw std::runtime_error("estimate_lipschitz: repeated degenerate draws");
}

// Randomized adjoint probing: max relative defect of <A u, v> vs <u, A* v>
// over `probes` Gaussian pairs (real parts compared).
template <class Scalar>
double adjoint_probe(const LinearMap<Scalar>& map, Rng& rng, int probes = 20) {
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    Vector<Scalar> u = detail::gaussian_like<Scalar>(rng, map.domain.size());
    Vector<Scalar> v = detail::gaussian_like<Scalar>(rng, map.range.size());
    Vector<Scalar> au = map.apply(u);
    Vector<Scalar> atv = map.adjoint(v);
    const double lhs = std::real(Vector<Scalar>(v).dot(au));
    const double rhs = std::real(Vector<Scalar>(atv).dot(u));
    const double scale = std::max({std::abs(lhs), std::abs(rhs), au.norm() * v.norm(), 1e-30});
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

}  // namespace fbs
