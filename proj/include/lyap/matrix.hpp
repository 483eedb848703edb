#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace lyap {

using Complex = std::complex<double>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class T>
concept Scalar = std::is_same_v<T, double> || std::is_same_v<T, Complex>;

template <Scalar T>
constexpr T conj_of(const T& x) {
  if constexpr (is_complex<T>::value) {
    return std::conj(x);
  } else {
    return x;
  }
}

template <Scalar T>
constexpr double abs2(const T& x) {
  if constexpr (is_complex<T>::value) {
    return std::norm(x);
  } else {
    return x * x;
  }
}

template <Scalar T>
bool is_finite(const T& x) {
  if constexpr (is_complex<T>::value) {
    return std::isfinite(x.real()) && std::isfinite(x.imag());
  } else {
    return std::isfinite(x);
  }
}

/// Dense square matrix with row-major storage. Intended for small dimensions
/// (d <= 8); every product allocates.
template <Scalar T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;

  explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim, T{}) {
    require(dim >= 1, ErrorKind::InvalidMatrix, "dimension must be >= 1");
  }

  Matrix(std::initializer_list<std::initializer_list<T>> rows)
      : dim_(rows.size()) {
    require(dim_ >= 1, ErrorKind::InvalidMatrix, "dimension must be >= 1");
    data_.reserve(dim_ * dim_);
    for (const auto& row : rows) {
      require(row.size() == dim_, ErrorKind::InvalidMatrix,
              "matrix rows must all have length d");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
    Matrix m(rows.size());
    for (std::size_t i = 0; i < m.dim_; ++i) {
      require(rows[i].size() == m.dim_, ErrorKind::InvalidMatrix,
              "matrix rows must all have length d");
      for (std::size_t j = 0; j < m.dim_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  static Matrix identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = T{1};
    return m;
  }

  static Matrix diagonal(std::span<const T> entries) {
    Matrix m(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
    return m;
  }

  static Matrix diagonal(std::initializer_list<T> entries) {
    return diagonal(std::span<const T>(entries.begin(), entries.size()));
  }

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * dim_ + j];
  }

  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const T& x) { return is_finite(x); });
  }

  /// Conjugate transpose (plain transpose for real matrices).
  Matrix adjoint() const {
    Matrix out(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) out(j, i) = conj_of((*this)(i, j));
    return out;
  }

  Matrix& operator+=(const Matrix& rhs) {
    check_same_dim(rhs);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
    return *this;
  }

  Matrix& operator-=(const Matrix& rhs) {
    check_same_dim(rhs);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
    return *this;
  }

  Matrix& operator*=(const T& s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
  friend Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
  friend Matrix operator*(Matrix lhs, const T& s) { return lhs *= s; }
  friend Matrix operator*(const T& s, Matrix rhs) { return rhs *= s; }
  friend Matrix operator-(Matrix m) { return m *= T{-1}; }

  friend Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
    lhs.check_same_dim(rhs);
    const std::size_t d = lhs.dim_;
    Matrix out(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        const T a = lhs(i, k);
        if (a == T{}) continue;
        for (std::size_t j = 0; j < d; ++j) out(i, j) += a * rhs(k, j);
      }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same_dim(const Matrix& rhs) const {
    require(dim_ == rhs.dim_, ErrorKind::InvalidMatrix,
            "dimension mismatch: " + std::to_string(dim_) + " vs " +
                std::to_string(rhs.dim_));
  }

  std::size_t dim_ = 0;
  std::vector<T> data_;
};

using RealSquareMatrix = Matrix<double>;
using ComplexSquareMatrix = Matrix<Complex>;

inline ComplexSquareMatrix to_complex(const RealSquareMatrix& m) {
  ComplexSquareMatrix out(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out(i, j) = m(i, j);
  return out;
}

template <Scalar T>
double max_abs_entry(const Matrix<T>& m) {
  double out = 0.0;
  for (const auto& x : m.data()) out = std::max(out, std::abs(x));
  return out;
}

template <Scalar T>
double frobenius_norm(const Matrix<T>& m) {
  double s = 0.0;
  for (const auto& x : m.data()) s += abs2(x);
  return std::sqrt(s);
}

template <Scalar T>
void require_finite(const Matrix<T>& m, std::string_view what = "matrix") {
  require(!m.empty(), ErrorKind::InvalidMatrix,
          std::string(what) + " is empty");
  require(m.all_finite(), ErrorKind::InvalidMatrix,
          std::string(what) + " has non-finite entries");
}

/// Hermitian (real symmetric when T = double) matrix. Construction checks
/// hermiticity to 1e-12 relative to max(1, max |h_ij|) and stores the
/// symmetrized (H + H^dagger)/2.
template <Scalar T>
class Hermitian {
 public:
  static constexpr double kTolerance = 1e-12;

  Hermitian() = default;

  explicit Hermitian(const Matrix<T>& m) : m_(m) {
    require_finite(m, "Hermitian input");
    const double scale = std::max(1.0, max_abs_entry(m));
    for (std::size_t i = 0; i < m.dim(); ++i)
      for (std::size_t j = 0; j <= i; ++j)
        require(std::abs(m(i, j) - conj_of(m(j, i))) <= kTolerance * scale,
                ErrorKind::InvalidMatrix, "matrix is not Hermitian");
    symmetrize();
  }

  /// Symmetrizes without the tolerance check. For matrices that are
  /// Hermitian by construction up to rounding.
  static Hermitian symmetrized(Matrix<T> m) {
    Hermitian h;
    h.m_ = std::move(m);
    h.symmetrize();
    return h;
  }

  static Hermitian zero(std::size_t dim) { return symmetrized(Matrix<T>(dim)); }

  const Matrix<T>& matrix() const noexcept { return m_; }
  std::size_t dim() const noexcept { return m_.dim(); }
  const T& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

  Hermitian& operator+=(const Hermitian& rhs) {
    m_ += rhs.m_;
    return *this;
  }
  Hermitian& operator*=(double s) {
    m_ *= T{s};
    return *this;
  }
  friend Hermitian operator+(Hermitian a, const Hermitian& b) { return a += b; }
  friend Hermitian operator*(double s, Hermitian a) { return a *= s; }

 private:
  void symmetrize() {
    for (std::size_t i = 0; i < m_.dim(); ++i) {
      if constexpr (is_complex<T>::value) m_(i, i) = T{m_(i, i).real(), 0.0};
      for (std::size_t j = 0; j < i; ++j) {
        const T avg = 0.5 * (m_(i, j) + conj_of(m_(j, i)));
        m_(i, j) = avg;
        m_(j, i) = conj_of(avg);
      }
    }
  }

  Matrix<T> m_;
};

using HermitianMatrix = Hermitian<Complex>;
using SymmetricMatrix = Hermitian<double>;

inline HermitianMatrix to_complex(const SymmetricMatrix& h) {
  return HermitianMatrix::symmetrized(to_complex(h.matrix()));
}

/// Product L_n * ... * L_1 of a sequence given in application order.
template <Scalar T>
Matrix<T> ordered_product(std::span<const Matrix<T>> seq) {
  require(!seq.empty(), ErrorKind::InvalidMatrix, "empty product");
  Matrix<T> out = seq.front();
  for (std::size_t k = 1; k < seq.size(); ++k) out = seq[k] * out;
  return out;
}

template <Scalar T>
Matrix<T> power(const Matrix<T>& m, unsigned exponent) {
  Matrix<T> out = Matrix<T>::identity(m.dim());
  for (unsigned k = 0; k < exponent; ++k) out = m * out;
  return out;
}

}  // namespace lyap
