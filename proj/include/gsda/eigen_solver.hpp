#ifndef GSDA_EIGEN_SOLVER_HPP
#define GSDA_EIGEN_SOLVER_HPP

#include "gsda/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace gsda {

/// Full eigendecomposition of a real symmetric matrix: ascending eigenvalues
/// and the matching orthonormal eigenvectors stored column-wise.
template <typename Scalar>
struct Eigensystem {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector eigenvalues;
  Matrix eigenvectors;

  Eigen::Index size() const { return eigenvalues.size(); }
  Scalar lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }

  /// lambda / lambda_max, in [0, 1] for a Laplacian spectrum.
  Vector normalized_eigenvalues() const {
    const Scalar top = lambda_max();
    if (!(top > Scalar(0))) throw std::invalid_argument("lambda_max must be positive to normalize the spectrum");
    Vector out = eigenvalues / top;
    return out.cwiseMax(Scalar(0));
  }
};

namespace detail {

// Householder reduction of the symmetric matrix held in `v` to tridiagonal
// form. On return `d` is the diagonal, `e` the subdiagonal (e[0] unused) and
// `v` the accumulated orthogonal transform. After the EISPACK tred2 routine.
template <typename Scalar>
void tridiagonalize(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v,
                    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& d, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& e) {
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = v.rows();
  d = v.row(n - 1).transpose();
  e.setZero(n);

  for (Eigen::Index i = n - 1; i > 0; --i) {
    Scalar scale(0), h(0);
    for (Eigen::Index k = 0; k < i; ++k) scale += abs(d(k));
    if (scale == Scalar(0)) {
      e(i) = d(i - 1);
      for (Eigen::Index j = 0; j < i; ++j) {
        d(j) = v(i - 1, j);
        v(i, j) = Scalar(0);
        v(j, i) = Scalar(0);
      }
    } else {
      for (Eigen::Index k = 0; k < i; ++k) {
        d(k) /= scale;
        h += d(k) * d(k);
      }
      Scalar f = d(i - 1);
      Scalar g = sqrt(h);
      if (f > Scalar(0)) g = -g;
      e(i) = scale * g;
      h -= f * g;
      d(i - 1) = f - g;
      for (Eigen::Index j = 0; j < i; ++j) e(j) = Scalar(0);

      for (Eigen::Index j = 0; j < i; ++j) {
        f = d(j);
        v(j, i) = f;
        g = e(j) + v(j, j) * f;
        for (Eigen::Index k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d(k);
          e(k) += v(k, j) * f;
        }
        e(j) = g;
      }
      f = Scalar(0);
      for (Eigen::Index j = 0; j < i; ++j) {
        e(j) /= h;
        f += e(j) * d(j);
      }
      const Scalar hh = f / (h + h);
      for (Eigen::Index j = 0; j < i; ++j) e(j) -= hh * d(j);
      for (Eigen::Index j = 0; j < i; ++j) {
        f = d(j);
        g = e(j);
        for (Eigen::Index k = j; k <= i - 1; ++k) v(k, j) -= (f * e(k) + g * d(k));
        d(j) = v(i - 1, j);
        v(i, j) = Scalar(0);
      }
    }
    d(i) = h;
  }

  for (Eigen::Index i = 0; i < n - 1; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = Scalar(1);
    const Scalar h = d(i + 1);
    if (h != Scalar(0)) {
      for (Eigen::Index k = 0; k <= i; ++k) d(k) = v(k, i + 1) / h;
      for (Eigen::Index j = 0; j <= i; ++j) {
        Scalar g(0);
        for (Eigen::Index k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (Eigen::Index k = 0; k <= i; ++k) v(k, j) -= g * d(k);
      }
    }
    for (Eigen::Index k = 0; k <= i; ++k) v(k, i + 1) = Scalar(0);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    d(j) = v(n - 1, j);
    v(n - 1, j) = Scalar(0);
  }
  v(n - 1, n - 1) = Scalar(1);
  e(0) = Scalar(0);
}

// Implicit QL iterations on the tridiagonal (d, e), rotating the columns of
// `v` along. After the EISPACK tql2 routine.
template <typename Scalar>
void tridiagonal_ql(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v,
                    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& d, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& e,
                    int max_iterations_per_value) {
  using std::abs;
  using std::hypot;
  const Eigen::Index n = v.rows();
  for (Eigen::Index i = 1; i < n; ++i) e(i - 1) = e(i);
  e(n - 1) = Scalar(0);

  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Scalar f(0), tst1(0);
  for (Eigen::Index l = 0; l < n; ++l) {
    tst1 = std::max(tst1, abs(d(l)) + abs(e(l)));
    Eigen::Index m = l;
    while (m < n - 1 && abs(e(m)) > eps * tst1) ++m;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > max_iterations_per_value) {
          throw NumericalError("symmetric eigensolver did not converge");
        }
        Scalar g = d(l);
        Scalar p = (d(l + 1) - g) / (Scalar(2) * e(l));
        Scalar r = hypot(p, Scalar(1));
        if (p < Scalar(0)) r = -r;
        d(l) = e(l) / (p + r);
        d(l + 1) = e(l) * (p + r);
        const Scalar dl1 = d(l + 1);
        Scalar h = g - d(l);
        for (Eigen::Index i = l + 2; i < n; ++i) d(i) -= h;
        f += h;

        p = d(m);
        Scalar c(1), c2(1), c3(1), s(0), s2(0);
        const Scalar el1 = e(l + 1);
        for (Eigen::Index i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e(i);
          h = c * p;
          r = hypot(p, e(i));
          e(i + 1) = s * r;
          s = e(i) / r;
          c = p / r;
          p = c * d(i) - s * g;
          d(i + 1) = h + s * (c * g + s * d(i));
          for (Eigen::Index k = 0; k < n; ++k) {
            h = v(k, i + 1);
            v(k, i + 1) = s * v(k, i) + c * h;
            v(k, i) = c * v(k, i) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e(l) / dl1;
        e(l) = s * p;
        d(l) = c * p;
      } while (abs(e(l)) > eps * tst1);
    }
    d(l) += f;
    e(l) = Scalar(0);
  }
}

}  // namespace detail

/// Symmetric eigendecomposition by Householder tridiagonalization followed by
/// implicit QL. Eigenvalues come back ascending; every eigenvector is flipped
/// so that its first entry with magnitude above 1e-12 is positive. Throws
/// NumericalError when an eigenvalue needs more than `max_iterations_per_value`
/// QL sweeps.
template <typename Derived>
Eigensystem<typename Derived::Scalar> eigendecompose(const Eigen::MatrixBase<Derived>& matrix,
                                                     int max_iterations_per_value = 60) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  const Eigen::Index n = matrix.rows();
  if (n == 0 || matrix.cols() != n) throw std::invalid_argument("eigendecompose expects a non-empty square matrix");
  if (!matrix.allFinite()) throw std::invalid_argument("eigendecompose: non-finite matrix entry");
  const Scalar scale = std::max(Scalar(1), matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale) {
    throw std::invalid_argument("eigendecompose expects a symmetric matrix");
  }

  Matrix v = matrix;
  Vector d, e;
  if (n == 1) {
    d = v.diagonal();
    v.setIdentity();
  } else {
    detail::tridiagonalize(v, d, e);
    detail::tridiagonal_ql(v, d, e, max_iterations_per_value);
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return d(a) < d(b); });

  Eigensystem<Scalar> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.eigenvalues(j) = d(order[j]);
    out.eigenvectors.col(j) = v.col(order[j]);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Scalar x = out.eigenvectors(k, j);
      if (std::abs(x) > Scalar(1e-12)) {
        if (x < Scalar(0)) out.eigenvectors.col(j) *= Scalar(-1);
        break;
      }
    }
  }
  return out;
}

}  // namespace gsda

#endif  // GSDA_EIGEN_SOLVER_HPP
