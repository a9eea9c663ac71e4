#pragma once

#include "cbf/scalar.hpp"

#include <json.hpp>

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cbf {

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// dense row-major square-or-rectangular matrix
template <class T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows_(r), cols_(c), a_(r * c, T(0)) {}

  static Matrix zero(std::size_t n) { return Matrix(n, n); }
  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }
  static Matrix unit(std::size_t n, std::size_t i, std::size_t j) {
    Matrix m(n, n);
    m(i, j) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
  const std::vector<T>& data() const { return a_; }
  std::vector<T>& data() { return a_; }

  bool is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](const T& x) { return scalar_traits<T>::is_zero(x); });
  }

  Matrix& operator+=(const Matrix& o) {
    same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    same_shape(o);
    for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  Matrix& operator*=(const T& s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator-(Matrix a) {
    for (auto& x : a.a_) x = -x;
    return a;
  }
  friend Matrix operator*(Matrix a, const T& s) { return a *= s; }
  friend Matrix operator*(const T& s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw dimension_error("matrix product shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& x = a(i, k);
        if (scalar_traits<T>::is_zero(x)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          if (!scalar_traits<T>::is_zero(b(k, j))) c(i, j) += x * b(k, j);
      }
    return c;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.a_ == b.a_;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const {
    double m = 0;
    for (const auto& x : a_) m = std::max(m, abs_d(x));
    return m;
  }

  std::string str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < rows_; ++i) {
      os << (i ? ",[" : "[");
      for (std::size_t j = 0; j < cols_; ++j) os << (j ? "," : "") << scalar_traits<T>::str((*this)(i, j));
      os << ']';
    }
    os << ']';
    return os.str();
  }

 private:
  void same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw dimension_error("matrix shape mismatch");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> a_;
};

template <class T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  return (a - b).max_abs();
}

template <class T>
Matrix<T> kron(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (scalar_traits<T>::is_zero(a(i, j))) continue;
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q) k(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
    }
  return k;
}

// reduced row echelon form in place; returns pivot columns
template <class T>
std::vector<std::size_t> rref(Matrix<T>& m, double tol = 1e-12) {
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t best = m.rows();
    if constexpr (scalar_traits<T>::exact) {
      for (std::size_t i = r; i < m.rows(); ++i)
        if (!scalar_traits<T>::is_zero(m(i, c))) { best = i; break; }
    } else {
      double bv = tol;
      for (std::size_t i = r; i < m.rows(); ++i)
        if (abs_d(m(i, c)) > bv) { bv = abs_d(m(i, c)); best = i; }
    }
    if (best == m.rows()) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(best, j));
    T inv = T(1) / m(r, c);
    for (std::size_t j = 0; j < m.cols(); ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || scalar_traits<T>::is_zero(m(i, c))) continue;
      T f = m(i, c);
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

// basis of {x : m x = 0}, one column vector per entry
template <class T>
std::vector<std::vector<T>> nullspace(Matrix<T> m) {
  auto piv = rref(m);
  std::vector<bool> is_piv(m.cols(), false);
  for (auto c : piv) is_piv[c] = true;
  std::vector<std::vector<T>> basis;
  for (std::size_t f = 0; f < m.cols(); ++f) {
    if (is_piv[f]) continue;
    std::vector<T> v(m.cols(), T(0));
    v[f] = T(1);
    for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -m(r, f);
    basis.push_back(std::move(v));
  }
  return basis;
}

template <class T>
std::size_t rank(Matrix<T> m) {
  return rref(m).size();
}

template <class T>
Matrix<T> inverse(const Matrix<T>& m) {
  if (!m.square()) throw dimension_error("inverse of non-square matrix");
  std::size_t n = m.rows();
  Matrix<T> aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = T(1);
  }
  auto piv = rref(aug);
  if (piv.size() < n || piv[n - 1] != n - 1) throw std::domain_error("singular matrix");
  Matrix<T> inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

// small random rationals p/q with |p| <= span, q in 1..den
template <class T>
T random_scalar(std::mt19937_64& rng, int span = 2, int den = 2) {
  std::uniform_int_distribution<int> P(-span, span), Q(1, den);
  int p = P(rng), q = Q(rng);
  return scalar_traits<T>::from_frac(p, q);
}

template <class T>
Matrix<T> random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double density = 1.0, int span = 2,
                        int den = 2) {
  Matrix<T> m(r, c);
  std::bernoulli_distribution keep(density);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (keep(rng)) m(i, j) = random_scalar<T>(rng, span, den);
  return m;
}

template <class T>
nlohmann::json to_json(const Matrix<T>& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if constexpr (scalar_traits<T>::exact)
        row.push_back(scalar_traits<T>::str(m(i, j)));
      else
        row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T>
Matrix<T> matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix JSON must be a non-empty array of rows");
  std::size_t r = j.size(), c = j[0].size();
  Matrix<T> m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (j[i].size() != c) throw std::invalid_argument("ragged matrix JSON");
    for (std::size_t k = 0; k < c; ++k) {
      const auto& e = j[i][k];
      if (e.is_string())
        m(i, k) = scalar_traits<T>::parse(e.get<std::string>());
      else if (e.is_number_integer())
        m(i, k) = scalar_traits<T>::from_int(e.get<long long>());
      else if (e.is_number())
        m(i, k) = T(e.get<double>());
      else
        throw std::invalid_argument("matrix entry must be a number or \"p/q\" string");
    }
  }
  return m;
}

}  // namespace cbf
