#pragma once

// Small dense matrix analysis: singular values, gap ratio, expansion rift,
// absolute value |M| = sqrt(M^dagger M), Hermitian log/exp and complex
// fractional powers. All routines are pure functions on values.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace lyap {

inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

/// Relative eigenvalue floor below which a matrix is not treated as
/// positive definite.
inline constexpr double kPdTolerance = 1e-13;

struct SingularSpectrum {
  std::vector<double> values;  // descending

  double largest() const { return values.front(); }
  double smallest() const { return values.back(); }
};

template <Scalar T>
struct Svd {
  Matrix<T> u;
  std::vector<double> s;  // descending
  Matrix<T> v;            // M = U diag(s) V^dagger
};

template <Scalar T>
struct EigenSystem {
  std::vector<double> values;  // ascending
  Matrix<T> vectors;           // column k belongs to values[k]
};

namespace detail {

/// ad - bc with one rounding error (Kahan's fused difference of products).
inline double det2_accurate(double a, double b, double c, double d) {
  const double w = b * c;
  const double e = std::fma(-b, c, w);
  const double f = std::fma(a, d, -w);
  return f + e;
}

/// Rotation parameter t = tan(phi) of the smaller Jacobi angle solving
/// t^2 + 2 zeta t - 1 = 0.
inline double jacobi_tangent(double zeta) {
  const double sign = zeta >= 0.0 ? 1.0 : -1.0;
  const double az = std::abs(zeta);
  if (az > 1e150) return sign / (2.0 * az);
  return sign / (az + std::sqrt(1.0 + az * az));
}

template <Scalar T>
void permute_columns(Matrix<T>& m, const std::vector<std::size_t>& order) {
  Matrix<T> out(m.dim());
  for (std::size_t c = 0; c < order.size(); ++c)
    for (std::size_t r = 0; r < m.dim(); ++r) out(r, c) = m(r, order[c]);
  m = std::move(out);
}

/// Scales column q of `m` by `phase`.
template <Scalar T>
void scale_column(Matrix<T>& m, std::size_t q, const T& phase) {
  for (std::size_t k = 0; k < m.dim(); ++k) m(k, q) *= phase;
}

template <Scalar T>
void rotate_columns(Matrix<T>& m, std::size_t p, std::size_t q, double c,
                    double s) {
  for (std::size_t k = 0; k < m.dim(); ++k) {
    const T mp = m(k, p);
    const T mq = m(k, q);
    m(k, p) = c * mp - s * mq;
    m(k, q) = s * mp + c * mq;
  }
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// A rotation is skipped once |h_pq| <= eps * sqrt(|h_pp h_qq|), which gives
/// eigenvalues to high relative accuracy for definite matrices.
template <Scalar T>
EigenSystem<T> eigh(const Hermitian<T>& h) {
  const std::size_t d = h.dim();
  Matrix<T> a = h.matrix();
  Matrix<T> v = Matrix<T>::identity(d);

  for (int sweep = 0; sweep < 100 && d > 1; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double g = std::abs(a(p, q));
        const double app = std::real(a(p, p));
        const double aqq = std::real(a(q, q));
        if (g == 0.0) continue;
        if (g <= kMachineEps * std::sqrt(std::abs(app * aqq)) ||
            g < std::numeric_limits<double>::min()) {
          a(p, q) = T{};
          a(q, p) = T{};
          continue;
        }
        rotated = true;
        // Phase so that the pivot becomes real and positive.
        const T u = a(p, q) / g;
        const T phase = conj_of(u);
        if (phase != T{1}) {
          detail::scale_column(a, q, phase);
          for (std::size_t k = 0; k < d; ++k) a(q, k) *= u;
          detail::scale_column(v, q, phase);
        }
        const double t = detail::jacobi_tangent((aqq - app) / (2.0 * g));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        detail::rotate_columns(a, p, q, c, s);
        for (std::size_t k = 0; k < d; ++k) {
          const T apk = a(p, k);
          const T aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = T{};
        a(q, p) = T{};
        detail::rotate_columns(v, p, q, c, s);
      }
    }
    if (!rotated) break;
  }

  std::vector<double> diag(d);
  for (std::size_t i = 0; i < d; ++i) diag[i] = std::real(a(i, i));
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });
  EigenSystem<T> out;
  out.values.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.values[i] = diag[order[i]];
  detail::permute_columns(v, order);
  out.vectors = std::move(v);
  return out;
}

/// Singular value decomposition by one-sided (Hestenes) Jacobi rotations,
/// which implicitly diagonalizes M^dagger M. For 2x2 input the smaller
/// singular value is recomputed as |det M| / s_1, or as abs_det / s_1 when
/// the caller knows |det M| exactly (e.g. unimodular cocycles).
template <Scalar T>
Svd<T> svd(const Matrix<T>& m, std::optional<double> abs_det = std::nullopt) {
  require_finite(m);
  const std::size_t d = m.dim();
  Matrix<T> a = m;
  Matrix<T> v = Matrix<T>::identity(d);

  for (int sweep = 0; sweep < 100 && d > 1; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        double alpha = 0.0, beta = 0.0;
        T gamma{};
        for (std::size_t k = 0; k < d; ++k) {
          alpha += abs2(a(k, p));
          beta += abs2(a(k, q));
          gamma += conj_of(a(k, p)) * a(k, q);
        }
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= kMachineEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const T phase = conj_of(gamma / g);
        if (phase != T{1}) {
          detail::scale_column(a, q, phase);
          detail::scale_column(v, q, phase);
        }
        const double t = detail::jacobi_tangent((beta - alpha) / (2.0 * g));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        detail::rotate_columns(a, p, q, c, s);
        detail::rotate_columns(v, p, q, c, s);
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sv(d);
  for (std::size_t j = 0; j < d; ++j) {
    double n2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) n2 += abs2(a(k, j));
    sv[j] = std::sqrt(n2);
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sv[x] > sv[y]; });
  Svd<T> out;
  out.s.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.s[i] = sv[order[i]];
  detail::permute_columns(a, order);
  detail::permute_columns(v, order);

  // Left singular vectors: normalized columns, with the trailing column of a
  // 2x2 completed orthogonally (its computed direction is noise when s_2 is
  // far below eps * s_1).
  out.u = Matrix<T>(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (out.s[j] > 0.0)
      for (std::size_t k = 0; k < d; ++k) out.u(k, j) = a(k, j) / out.s[j];
  }
  if (d == 2) {
    out.u(0, 1) = -conj_of(out.u(1, 0));
    out.u(1, 1) = conj_of(out.u(0, 0));
    if (out.s[0] > 0.0) {
      double det_abs;
      if (abs_det) {
        det_abs = *abs_det;
      } else if constexpr (is_complex<T>::value) {
        det_abs = std::abs(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
      } else {
        det_abs = std::abs(detail::det2_accurate(m(0, 0), m(0, 1), m(1, 0), m(1, 1)));
      }
      out.s[1] = std::min(out.s[0], det_abs / out.s[0]);
    }
  }
  out.v = std::move(v);
  return out;
}

/// Largest singular value. 2x2 real matrices use the closed form
/// s_1 = sqrt(((a+d)^2 + (c-b)^2)/4) + sqrt(((a-d)^2 + (b+c)^2)/4).
template <Scalar T>
double op_norm(const Matrix<T>& m) {
  if constexpr (!is_complex<T>::value) {
    if (m.dim() == 2) {
      require_finite(m);
      const double q = std::hypot(m(0, 0) + m(1, 1), m(1, 0) - m(0, 1));
      const double r = std::hypot(m(0, 0) - m(1, 1), m(1, 0) + m(0, 1));
      return 0.5 * (q + r);
    }
  }
  if (m.dim() == 1) {
    require_finite(m);
    return std::abs(m(0, 0));
  }
  return svd(m).s.front();
}

/// Running product L_n...L_1 stored as Q_n with ||Q_n|| = 1 and a log scale,
/// Q_k = L_k Q_{k-1} / ||L_k Q_{k-1}||. log_norm() equals log||L_n...L_1||
/// without overflow.
template <Scalar T>
class RenormProduct {
 public:
  explicit RenormProduct(std::size_t dim) : q_(Matrix<T>::identity(dim)) {}

  void push(const Matrix<T>& l) {
    Matrix<T> next = l * q_;
    const double n = op_norm(next);
    require(n > 0.0 && std::isfinite(n), ErrorKind::DegenerateMatrix,
            "product collapsed at step " + std::to_string(count_ + 1));
    next *= T{1.0 / n};
    q_ = std::move(next);
    log_scale_ += std::log(n);
    ++count_;
  }

  double log_norm() const noexcept { return log_scale_; }
  std::size_t count() const noexcept { return count_; }
  const Matrix<T>& direction() const noexcept { return q_; }

  /// (1/n) log||L_n...L_1||.
  double exponent() const {
    require(count_ > 0, ErrorKind::DomainError, "empty product");
    return log_scale_ / static_cast<double>(count_);
  }

 private:
  Matrix<T> q_;
  double log_scale_ = 0.0;
  std::size_t count_ = 0;
};

template <Scalar T>
SingularSpectrum singular_values(const Matrix<T>& m,
                                 std::optional<double> abs_det = std::nullopt) {
  return SingularSpectrum{svd(m, abs_det).s};
}

template <Scalar T>
void require_invertible(const Matrix<T>& m,
                        std::optional<double> abs_det = std::nullopt) {
  const auto s = singular_values(m, abs_det);
  require(s.smallest() > 0.0, ErrorKind::DegenerateMatrix,
          "matrix is singular");
}

/// s_1 / s_2.
template <Scalar T>
double gap_ratio(const Matrix<T>& m,
                 std::optional<double> abs_det = std::nullopt) {
  require(m.dim() >= 2, ErrorKind::DomainError, "gap ratio needs d >= 2");
  const auto s = singular_values(m, abs_det);
  require(s.values[1] > 0.0, ErrorKind::DegenerateMatrix,
          "second singular value vanishes");
  return s.values[0] / s.values[1];
}

/// log of the expansion rift, log ||L_n...L_1|| - sum log ||L_k||.
template <Scalar T>
double log_expansion_rift(std::span<const Matrix<T>> seq) {
  require(seq.size() >= 2, ErrorKind::DomainError,
          "expansion rift needs at least two matrices");
  double sum_log_norms = 0.0;
  RenormProduct<T> prod(seq.front().dim());
  for (const auto& l : seq) {
    require_invertible(l);
    sum_log_norms += std::log(op_norm(l));
    prod.push(l);
  }
  return std::min(0.0, prod.log_norm() - sum_log_norms);
}

/// ||L_n...L_1|| / prod ||L_k||, a value in (0, 1]. May underflow to 0 for
/// long badly aligned sequences; use log_expansion_rift there.
template <Scalar T>
double expansion_rift(std::span<const Matrix<T>> seq) {
  return std::exp(log_expansion_rift(seq));
}

template <Scalar T>
double expansion_rift(const Matrix<T>& first, const Matrix<T>& second) {
  const Matrix<T> pair[] = {first, second};
  return expansion_rift(std::span<const Matrix<T>>(pair));
}

namespace detail {

/// V diag(f(s)) V^dagger.
template <Scalar T, class F>
Hermitian<T> reassemble(const Matrix<T>& vecs, std::span<const double> vals,
                        F&& f) {
  const std::size_t d = vecs.dim();
  Matrix<T> out(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double fk = f(vals[k]);
    for (std::size_t i = 0; i < d; ++i) {
      const T vik = vecs(i, k) * fk;
      for (std::size_t j = 0; j < d; ++j) out(i, j) += vik * conj_of(vecs(j, k));
    }
  }
  return Hermitian<T>::symmetrized(std::move(out));
}

}  // namespace detail

/// |M| = sqrt(M^dagger M), positive semidefinite.
template <Scalar T>
Hermitian<T> abs_part(const Matrix<T>& m,
                      std::optional<double> abs_det = std::nullopt) {
  const auto f = svd(m, abs_det);
  return detail::reassemble(f.v, std::span<const double>(f.s),
                            [](double x) { return x; });
}

/// log |M| computed from the singular value decomposition, so that small
/// singular values recovered through abs_det keep full relative accuracy.
template <Scalar T>
Hermitian<T> log_abs(const Matrix<T>& m,
                     std::optional<double> abs_det = std::nullopt) {
  const auto f = svd(m, abs_det);
  const double smin = f.s.back();
  const bool accurate_tail = m.dim() <= 2;
  require(smin > 0.0 && (accurate_tail || smin > kPdTolerance * f.s.front()),
          ErrorKind::NotPositiveDefinite, "|M| is not positive definite");
  return detail::reassemble(f.v, std::span<const double>(f.s),
                            [](double x) { return std::log(x); });
}

/// log |M^dagger|.
template <Scalar T>
Hermitian<T> log_abs_adjoint(const Matrix<T>& m,
                             std::optional<double> abs_det = std::nullopt) {
  return log_abs(m.adjoint(), abs_det);
}

/// || |A^dagger| |B| ||, evaluated as || S_A (U_A^dagger V_B) S_B || from the
/// singular factors so that the result keeps relative accuracy.
template <Scalar T>
double norm_abs_adjoint_times_abs(const Matrix<T>& a, const Matrix<T>& b) {
  const auto fa = svd(a.adjoint());  // right vectors of A^dagger = left of A
  const auto fb = svd(b);
  const std::size_t d = a.dim();
  Matrix<T> w(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      T acc{};
      for (std::size_t k = 0; k < d; ++k) acc += conj_of(fa.v(k, i)) * fb.v(k, j);
      w(i, j) = fa.s[i] * acc * fb.s[j];
    }
  return op_norm(w);
}

template <Scalar T>
double lambda_max(const Hermitian<T>& h) {
  return eigh(h).values.back();
}

template <Scalar T>
double lambda_min(const Hermitian<T>& h) {
  return eigh(h).values.front();
}

/// Spectral norm of a Hermitian matrix, max |lambda|.
template <Scalar T>
double hermitian_norm(const Hermitian<T>& h) {
  const auto e = eigh(h);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

template <Scalar T>
Hermitian<T> matrix_exp(const Hermitian<T>& h) {
  const auto e = eigh(h);
  return detail::reassemble(e.vectors, std::span<const double>(e.values),
                            [](double x) { return std::exp(x); });
}

template <Scalar T>
EigenSystem<T> require_positive_definite(const Hermitian<T>& p) {
  auto e = eigh(p);
  const double scale =
      std::max(std::abs(e.values.front()), std::abs(e.values.back()));
  require(e.values.front() > kPdTolerance * scale, ErrorKind::NotPositiveDefinite,
          "smallest eigenvalue " + std::to_string(e.values.front()) +
              " is not positive");
  return e;
}

template <Scalar T>
Hermitian<T> log_pd(const Hermitian<T>& p) {
  const auto e = require_positive_definite(p);
  return detail::reassemble(e.vectors, std::span<const double>(e.values),
                            [](double x) { return std::log(x); });
}

/// P^z = V diag(lambda^z) V^dagger for positive definite P.
template <Scalar T>
ComplexSquareMatrix complex_power(const Hermitian<T>& p, Complex z) {
  const auto e = require_positive_definite(p);
  const std::size_t d = p.dim();
  ComplexSquareMatrix out(d);
  for (std::size_t k = 0; k < d; ++k) {
    const Complex fk = std::exp(z * std::log(e.values[k]));
    for (std::size_t i = 0; i < d; ++i) {
      const Complex vik = Complex(e.vectors(i, k)) * fk;
      for (std::size_t j = 0; j < d; ++j)
        out(i, j) += vik * std::conj(Complex(e.vectors(j, k)));
    }
  }
  return out;
}

/// ||M^dagger M - M M^dagger|| <= tol ||M||^2.
template <Scalar T>
bool is_normal(const Matrix<T>& m, double tol = 1e-10) {
  const auto adj = m.adjoint();
  const double n = op_norm(m);
  return op_norm(adj * m - m * adj) <= tol * n * n;
}

}  // namespace lyap
