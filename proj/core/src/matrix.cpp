#include "stabcert/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace stabcert {

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("matrix addition: dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("matrix subtraction: dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: dimension mismatch");
  Matrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;
      const double* bl = b.row(l);
      for (std::size_t j = 0; j < m; ++j) ci[j] += ail * bl[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix symmetric_part(const Matrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("symmetric_part: matrix not square");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size())
    throw std::invalid_argument("matvec: dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += ai[j] * x[j];
    y[i] = s;
  }
  return y;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data()) s += x * x;
  return std::sqrt(s);
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = max_abs(a);
  const double tol = rel_tol * (scale > 0.0 ? scale : 1.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol) return false;
  return true;
}

bool all_finite(const Matrix& a) {
  for (double x : a.data())
    if (!std::isfinite(x)) return false;
  return true;
}

double quadratic_form(const Matrix& a, const Vector& v, const Vector& w) {
  if (a.rows() != v.size() || a.cols() != w.size())
    throw std::invalid_argument("quadratic_form: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double r = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) r += ai[j] * w[j];
    s += v[i] * r;
  }
  return s;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

void axpy(double s, const Vector& x, Vector& y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

Vector scaled(const Vector& v, double s) {
  Vector r(v);
  for (double& x : r) x *= s;
  return r;
}

} // namespace stabcert
