#include "stabcert/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "stabcert/errors.hpp"

namespace stabcert::numerics {

namespace {

void require_square(const Matrix& a, const char* who) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square and nonempty");
}

void require_symmetric(const Matrix& a, double rel_tol, const char* who) {
  if (!is_symmetric(a, rel_tol))
    throw std::invalid_argument(std::string(who) + ": matrix not symmetric within tolerance");
}

double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

} // namespace

Matrix cholesky(const Matrix& a, const Tolerances& tol) {
  require_square(a, "cholesky");
  require_symmetric(a, tol.symmetry_rel, "cholesky");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw NotSPD("cholesky: pivot " + std::to_string(j) + " is " + std::to_string(d));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Vector forward_substitute(const Matrix& l, const Vector& b) {
  const std::size_t n = l.rows();
  if (b.size() != n) throw std::invalid_argument("forward_substitute: size mismatch");
  Vector x(b);
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    const double* li = l.row(i);
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
    x[i] = s / li[i];
  }
  return x;
}

Vector backward_substitute_transposed(const Matrix& l, const Vector& b) {
  const std::size_t n = l.rows();
  if (b.size() != n) throw std::invalid_argument("backward_substitute: size mismatch");
  Vector x(b);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

Matrix cholesky_solve(const Matrix& l, const Matrix& b) {
  const std::size_t n = l.rows();
  if (b.rows() != n) throw std::invalid_argument("cholesky_solve: size mismatch");
  Matrix x(n, b.cols());
  Vector col(n);
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
    Vector y = forward_substitute(l, col);
    Vector z = backward_substitute_transposed(l, y);
    for (std::size_t i = 0; i < n; ++i) x(i, j) = z[i];
  }
  return x;
}

LuFactors lu_factor(const Matrix& a) {
  require_square(a, "lu_factor");
  const std::size_t n = a.rows();
  LuFactors f;
  f.lu = a;
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), 0);
  f.sign = 1;
  Matrix& lu = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu(i, k));
      if (v > best) { best = v; piv = i; }
    }
    if (!(best > 0.0))
      throw std::runtime_error("lu_factor: singular matrix at column " + std::to_string(k));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
      f.sign = -f.sign;
    }
    const double pivval = lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = lu(i, k) / pivval;
      lu(i, k) = m;
      if (m == 0.0) continue;
      const double* lk = lu.row(k);
      double* li = lu.row(i);
      for (std::size_t j = k + 1; j < n; ++j) li[j] -= m * lk[j];
    }
  }
  return f;
}

Vector lu_solve(const LuFactors& f, const Vector& b) {
  const std::size_t n = f.lu.rows();
  if (b.size() != n) throw std::invalid_argument("lu_solve: size mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[f.perm[i]];
  for (std::size_t i = 1; i < n; ++i) {
    double s = x[i];
    const double* li = f.lu.row(i);
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * x[k];
    x[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    const double* li = f.lu.row(ii);
    for (std::size_t k = ii + 1; k < n; ++k) s -= li[k] * x[k];
    x[ii] = s / li[ii];
  }
  return x;
}

Matrix lu_inverse(const LuFactors& f) {
  const std::size_t n = f.lu.rows();
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vector col = lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    e[j] = 0.0;
  }
  return inv;
}

std::pair<double, int> lu_logdet(const LuFactors& f) {
  double logdet = 0.0;
  int sign = f.sign;
  for (std::size_t i = 0; i < f.lu.rows(); ++i) {
    const double u = f.lu(i, i);
    logdet += std::log(std::abs(u));
    if (u < 0.0) sign = -sign;
  }
  return {logdet, sign};
}

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form with
// accumulation of the orthogonal transform in z.
void householder_tridiagonalize(Matrix& z, Vector& d, Vector& e) {
  const std::size_t n = z.rows();
  for (std::size_t i = n - 1; i >= 1; --i) {
    const std::size_t l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::abs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = (f >= 0.0 ? -std::sqrt(h) : std::sqrt(h));
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = z(i, j);
          g = e[j] - hh * f;
          e[j] = g;
          for (std::size_t k = 0; k <= j; ++k)
            z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (std::size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k < i; ++k) g += z(i, k) * z(k, j);
        for (std::size_t k = 0; k < i; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      z(j, i) = 0.0;
      z(i, j) = 0.0;
    }
  }
}

// Implicit-shift QL sweeps on the tridiagonal (d, e); plane rotations are
// applied to the columns of z as well.
void tridiagonal_ql(Vector& d, Vector& e, Matrix& z) {
  const std::size_t n = d.size();
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 64)
          throw Error("tridiagonal_ql: too many iterations");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + sign_of(g) * std::abs(r));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        bool underflow = false;
        for (std::size_t ii = m; ii-- > l;) {
          double f = s * e[ii];
          const double b = c * e[ii];
          r = std::hypot(f, g);
          e[ii + 1] = r;
          if (r == 0.0) {
            d[ii + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[ii + 1] - p;
          r = (d[ii] - g) * s + 2.0 * c * b;
          p = s * r;
          d[ii + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k) {
            f = z(k, ii + 1);
            z(k, ii + 1) = s * z(k, ii) + c * f;
            z(k, ii) = c * z(k, ii) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

void sort_eig_ascending(Vector& values, Matrix& vectors) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Vector sv(n);
  Matrix sz(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    sv[j] = values[idx[j]];
    for (std::size_t i = 0; i < n; ++i) sz(i, j) = vectors(i, idx[j]);
  }
  values = std::move(sv);
  vectors = std::move(sz);
}

// Deterministic eigenvector orientation: largest-magnitude entry positive.
void normalize_column_signs(Matrix& vectors) {
  for (std::size_t j = 0; j < vectors.cols(); ++j) {
    std::size_t arg = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
      const double v = std::abs(vectors(i, j));
      if (v > best) { best = v; arg = i; }
    }
    if (vectors(arg, j) < 0.0)
      for (std::size_t i = 0; i < vectors.rows(); ++i) vectors(i, j) = -vectors(i, j);
  }
}

} // namespace

EigResult sym_eig(const Matrix& a, const Tolerances& tol) {
  require_square(a, "sym_eig");
  require_symmetric(a, tol.symmetry_rel, "sym_eig");
  const std::size_t n = a.rows();
  EigResult r;
  r.vectors = a;
  r.values.assign(n, 0.0);
  if (n == 1) {
    r.values[0] = a(0, 0);
    r.vectors = Matrix::identity(1);
    return r;
  }
  Vector e(n, 0.0);
  householder_tridiagonalize(r.vectors, r.values, e);
  tridiagonal_ql(r.values, e, r.vectors);
  sort_eig_ascending(r.values, r.vectors);
  normalize_column_signs(r.vectors);
  return r;
}

EigResult sym_eig_jacobi(const Matrix& a, const Tolerances& tol) {
  require_square(a, "sym_eig_jacobi");
  require_symmetric(a, tol.symmetry_rel, "sym_eig_jacobi");
  const std::size_t n = a.rows();
  Matrix m = symmetric_part(a);
  Matrix v = Matrix::identity(n);
  const double fro = frobenius_norm(m);
  const double stop = 1e-15 * (fro > 0.0 ? fro : 1.0);
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * m(p, q) * m(p, q);
    if (std::sqrt(off) <= stop) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = sign_of(theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double mkp = m(k, p);
          const double mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double mpk = m(p, k);
          const double mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  EigResult r;
  r.values.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) r.values[i] = m(i, i);
  r.vectors = std::move(v);
  sort_eig_ascending(r.values, r.vectors);
  normalize_column_signs(r.vectors);
  return r;
}

PencilEig sym_eig_pencil(const Matrix& a, const Matrix& b, const Tolerances& tol) {
  require_square(a, "sym_eig_pencil");
  if (a.rows() != b.rows() || b.rows() != b.cols())
    throw std::invalid_argument("sym_eig_pencil: dimension mismatch");
  require_symmetric(a, tol.symmetry_rel, "sym_eig_pencil");
  const std::size_t n = a.rows();
  const Matrix l = cholesky(b, tol);

  // C = L^-1 A L^-T, formed via triangular solves.
  Matrix y(n, n);
  Vector col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = a(i, j);
    Vector s = forward_substitute(l, col);
    for (std::size_t i = 0; i < n; ++i) y(i, j) = s[i];
  }
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) col[j] = y(i, j);
    Vector s = forward_substitute(l, col);
    for (std::size_t j = 0; j < n; ++j) c(i, j) = s[j];
  }
  c = symmetric_part(c);

  EigResult eig = sym_eig(c, tol);

  PencilEig r;
  r.values = eig.values;
  Vector w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = eig.vectors(i, 0);
  Vector v = backward_substitute_transposed(l, w);
  const double vbv = quadratic_form(b, v, v);
  if (!(vbv > 0.0)) throw Error("sym_eig_pencil: eigenvector has non-positive B-norm");
  const double inv = 1.0 / std::sqrt(vbv);
  for (double& x : v) x *= inv;
  // Deterministic orientation.
  std::size_t arg = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(v[i]) > best) { best = std::abs(v[i]); arg = i; }
  if (v[arg] < 0.0)
    for (double& x : v) x = -x;
  r.smallest = std::move(v);
  return r;
}

std::pair<double, Vector> sym_eig_smallest(const Matrix& a, const Matrix& b,
                                           const Tolerances& tol) {
  PencilEig p = sym_eig_pencil(a, b, tol);
  return {p.values.front(), std::move(p.smallest)};
}

Matrix solve_lyapunov_kronecker(const Matrix& t, const Matrix& c) {
  require_square(t, "solve_lyapunov_kronecker");
  const std::size_t n = t.rows();
  if (c.rows() != n || c.cols() != n)
    throw std::invalid_argument("solve_lyapunov_kronecker: dimension mismatch");
  const std::size_t nn = n * n;
  Matrix m(nn, nn);
  Vector rhs(nn, 0.0);
  // vec is column-major: entry (i, j) -> index i + j*n.
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      const std::size_t eq = k + l * n;
      for (std::size_t i = 0; i < n; ++i) m(eq, i + l * n) += t(i, k);
      for (std::size_t j = 0; j < n; ++j) m(eq, k + j * n) += t(j, l);
      rhs[eq] = c(k, l);
    }
  }
  LuFactors f;
  try {
    f = lu_factor(m);
  } catch (const std::runtime_error&) {
    throw SingularLyapunov("solve_lyapunov_kronecker: singular Kronecker system (spectra of T and -T intersect)");
  }
  Vector x = lu_solve(f, rhs);
  Matrix p(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) p(i, j) = x[i + j * n];
  return symmetric_part(p);
}

namespace {

double lyapunov_residual(const Matrix& t, const Matrix& p, const Matrix& c) {
  Matrix r = matmul(transpose(t), p);
  r += matmul(p, t);
  r -= c;
  return frobenius_norm(r);
}

} // namespace

Matrix solve_lyapunov(const Matrix& t, const Matrix& c, const Tolerances& tol) {
  require_square(t, "solve_lyapunov");
  const std::size_t n = t.rows();
  if (c.rows() != n || c.cols() != n)
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  require_symmetric(c, tol.symmetry_rel, "solve_lyapunov");
  const double cnorm = frobenius_norm(c);
  if (cnorm == 0.0) return Matrix(n, n);

  // Sign-function Newton iteration on A = -T (Hurwitz for stable T):
  //   A <- (A/gamma + gamma A^-1)/2,  Q <- (Q/gamma + gamma A^-T Q A^-1)/2,
  // with determinant scaling gamma = |det A|^(1/n). At convergence A -> -I
  // and P = Q/2.
  Matrix a = t;
  a *= -1.0;
  Matrix q = c;
  bool converged = false;
  bool singular = false;
  for (int iter = 0; iter < tol.lyapunov_max_iter; ++iter) {
    LuFactors f;
    try {
      f = lu_factor(a);
    } catch (const std::runtime_error&) {
      singular = true;
      break;
    }
    const auto [logdet, detsign] = lu_logdet(f);
    (void)detsign;
    double gamma = std::exp(logdet / static_cast<double>(n));
    if (!std::isfinite(gamma) || gamma < 1e-150 || gamma > 1e150) gamma = 1.0;
    const Matrix ainv = lu_inverse(f);
    Matrix anext = a;
    anext *= 1.0 / (2.0 * gamma);
    anext += (gamma / 2.0) * ainv;
    Matrix qnext = matmul(matmul(transpose(ainv), q), ainv);
    qnext *= gamma / 2.0;
    Matrix qa = q;
    qa *= 1.0 / (2.0 * gamma);
    qnext += qa;
    Matrix diff = anext - a;
    const double rel = frobenius_norm(diff) / std::max(1.0, frobenius_norm(anext));
    a = std::move(anext);
    q = symmetric_part(qnext);
    if (rel <= 1e-12) {
      converged = true;
      break;
    }
  }
  if (converged && !singular) {
    Matrix p = q;
    p *= 0.5;
    if (lyapunov_residual(t, p, c) <= tol.lyapunov_residual_rel * cnorm) return p;
  }
  if (n <= static_cast<std::size_t>(tol.lyapunov_kron_limit)) {
    Matrix p = solve_lyapunov_kronecker(t, c);
    if (lyapunov_residual(t, p, c) <= tol.lyapunov_residual_rel * cnorm) return p;
  }
  throw SingularLyapunov(
      "solve_lyapunov: iteration failed to converge to the residual bound "
      "(T is likely not stable enough to define the solution)");
}

namespace {

struct PivotedQr {
  Matrix qr;                      // Householder vectors below the diagonal, R above
  Vector beta;                    // Householder scalars
  std::vector<std::size_t> perm;  // column permutation
  std::size_t rank = 0;
};

PivotedQr pivoted_qr(const Matrix& a, double rank_rel_tol) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  PivotedQr f;
  f.qr = a;
  f.beta.assign(n, 0.0);
  f.perm.resize(n);
  std::iota(f.perm.begin(), f.perm.end(), 0);
  Vector colnorm(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += f.qr(i, j) * f.qr(i, j);
    colnorm[j] = s;
  }
  const std::size_t steps = std::min(m, n);
  double first_pivot = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    // Recompute remaining column norms for pivoting (matrices here are tiny).
    std::size_t piv = k;
    double best = -1.0;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += f.qr(i, j) * f.qr(i, j);
      colnorm[j] = s;
      if (s > best) { best = s; piv = j; }
    }
    if (piv != k) {
      for (std::size_t i = 0; i < m; ++i) std::swap(f.qr(i, k), f.qr(i, piv));
      std::swap(f.perm[k], f.perm[piv]);
    }
    double norm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) norm2 += f.qr(i, k) * f.qr(i, k);
    const double norm = std::sqrt(norm2);
    if (k == 0) first_pivot = norm;
    if (norm <= rank_rel_tol * std::max(first_pivot, 1e-300)) break;
    f.rank = k + 1;
    // Householder vector for column k.
    const double alpha = (f.qr(k, k) >= 0.0 ? -norm : norm);
    double v0 = f.qr(k, k) - alpha;
    Vector v(m - k, 0.0);
    v[0] = v0;
    for (std::size_t i = k + 1; i < m; ++i) v[i - k] = f.qr(i, k);
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    if (vnorm2 == 0.0) { f.qr(k, k) = alpha; continue; }
    const double beta = 2.0 / vnorm2;
    // Apply to remaining columns (including k).
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i - k] * f.qr(i, j);
      s *= beta;
      for (std::size_t i = k; i < m; ++i) f.qr(i, j) -= s * v[i - k];
    }
    f.qr(k, k) = alpha;
    // Store the Householder vector (normalized so v[0] = 1) below the diagonal.
    for (std::size_t i = k + 1; i < m; ++i) f.qr(i, k) = v[i - k] / v0;
    f.beta[k] = beta * v0 * v0;  // scalar for the normalized vector
  }
  return f;
}

} // namespace

LeastSquares least_squares(const Matrix& a, const Vector& b, double rank_rel_tol) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m) throw std::invalid_argument("least_squares: size mismatch");
  PivotedQr f = pivoted_qr(a, rank_rel_tol);
  // Apply the Householder reflections to b.
  Vector qtb = b;
  for (std::size_t k = 0; k < f.rank; ++k) {
    double s = qtb[k];
    for (std::size_t i = k + 1; i < m; ++i) s += f.qr(i, k) * qtb[i];
    s *= f.beta[k];
    qtb[k] -= s;
    for (std::size_t i = k + 1; i < m; ++i) qtb[i] -= s * f.qr(i, k);
  }
  // Back-substitute on the leading rank x rank block.
  Vector xp(n, 0.0);
  for (std::size_t kk = f.rank; kk-- > 0;) {
    double s = qtb[kk];
    for (std::size_t j = kk + 1; j < f.rank; ++j) s -= f.qr(kk, j) * xp[j];
    xp[kk] = s / f.qr(kk, kk);
  }
  LeastSquares r;
  r.rank = f.rank;
  r.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) r.x[f.perm[j]] = xp[j];
  Vector ax = matvec(a, r.x);
  double res = 0.0;
  for (std::size_t i = 0; i < m; ++i) res += (ax[i] - b[i]) * (ax[i] - b[i]);
  r.residual = std::sqrt(res);
  return r;
}

std::size_t matrix_rank(const Matrix& a, double rank_rel_tol) {
  return pivoted_qr(a, rank_rel_tol).rank;
}

// ---------------------------------------------------------------------------
// Linear programming: two-phase dense tableau simplex with Bland's rule.
// Variables are shifted to x = lower + xh with 0 <= xh <= upper - lower and
// the upper bounds kept as explicit slack rows, so the tableau only ever
// deals with nonnegative variables.
// ---------------------------------------------------------------------------

namespace {

struct Tableau {
  std::size_t rows = 0;
  std::size_t cols = 0;  // structural + logical columns, no RHS
  std::vector<std::vector<double>> t;  // rows x (cols + 1); last entry is RHS
  std::vector<std::size_t> basis;      // column basic in each row
  std::vector<bool> forbidden;         // columns barred from entering

  double& at(std::size_t i, std::size_t j) { return t[i][j]; }
  double& rhs(std::size_t i) { return t[i][cols]; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double pv = t[pr][pc];
    for (std::size_t j = 0; j <= cols; ++j) t[pr][j] /= pv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == pr) continue;
      const double m = t[i][pc];
      if (m == 0.0) continue;
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= m * t[pr][j];
    }
    basis[pr] = pc;
  }
};

// Minimize obj over the tableau's feasible region. Bland's rule; returns the
// objective value. obj has size cols.
double run_simplex(Tableau& tab, const Vector& obj, const Tolerances& tol) {
  const std::size_t iter_cap = 50 * (tab.rows + tab.cols) + 1000;
  // Reduced-cost row maintained explicitly: z[j] = obj[j] - sum_i obj[basis_i] * t[i][j].
  Vector z(tab.cols + 1, 0.0);
  auto recompute_costs = [&]() {
    for (std::size_t j = 0; j <= tab.cols; ++j) {
      double s = (j < tab.cols) ? obj[j] : 0.0;
      for (std::size_t i = 0; i < tab.rows; ++i) {
        const double cb = obj[tab.basis[i]];
        if (cb != 0.0) s -= cb * tab.t[i][j];
      }
      z[j] = s;
    }
  };
  recompute_costs();
  for (std::size_t iter = 0; iter < iter_cap; ++iter) {
    // Bland: lowest-index column with negative reduced cost.
    std::size_t enter = tab.cols;
    for (std::size_t j = 0; j < tab.cols; ++j) {
      if (tab.forbidden[j]) continue;
      if (z[j] < -tol.lp_pivot_tol) { enter = j; break; }
    }
    if (enter == tab.cols) return -z[tab.cols];  // optimal; z holds -objective in RHS slot
    // Ratio test; Bland tie-break on lowest basic variable index.
    std::size_t leave = tab.rows;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < tab.rows; ++i) {
      const double aij = tab.t[i][enter];
      if (aij > tol.lp_pivot_tol) {
        const double ratio = tab.rhs(i) / aij;
        if (leave == tab.rows || ratio < best_ratio - 1e-15 ||
            (std::abs(ratio - best_ratio) <= 1e-15 && tab.basis[i] < tab.basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave == tab.rows)
      throw Error("solve_lp: unbounded direction encountered (inconsistent input)");
    tab.pivot(leave, enter);
    // Update the cost row by the same elimination.
    const double m = z[enter];
    if (m != 0.0)
      for (std::size_t j = 0; j <= tab.cols; ++j) z[j] -= m * tab.t[leave][j];
  }
  throw Error("solve_lp: iteration cap exceeded");
}

} // namespace

LpResult solve_lp(const Vector& c, const Vector& lower, const Vector& upper,
                  const std::vector<LinearConstraint>& constraints,
                  const Tolerances& tol) {
  const std::size_t q = c.size();
  if (q == 0) throw std::invalid_argument("solve_lp: empty objective");
  if (lower.size() != q || upper.size() != q)
    throw std::invalid_argument("solve_lp: box dimension mismatch");
  for (std::size_t i = 0; i < q; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw std::invalid_argument("solve_lp: box bounds must be finite");
    if (lower[i] > upper[i]) throw Infeasible("solve_lp: empty box");
  }
  for (const auto& con : constraints)
    if (con.a.size() != q)
      throw std::invalid_argument("solve_lp: constraint dimension mismatch");

  const std::size_t m = constraints.size();
  const std::size_t rows = m + q;
  // Columns: q structural xh, m surplus, q upper-bound slacks, then artificials.
  const std::size_t base_cols = q + m + q;

  // Shifted RHS for constraints: a' xh >= b - a' lower.
  Vector bhat(m);
  double bscale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    bhat[i] = constraints[i].b - dot(constraints[i].a, lower);
    bscale = std::max(bscale, std::abs(bhat[i]));
  }

  std::vector<std::size_t> artificial_col(m, base_cols);  // sentinel: none
  std::size_t n_art = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (bhat[i] > 0.0) artificial_col[i] = base_cols + n_art++;

  Tableau tab;
  tab.rows = rows;
  tab.cols = base_cols + n_art;
  tab.t.assign(rows, std::vector<double>(tab.cols + 1, 0.0));
  tab.basis.assign(rows, 0);
  tab.forbidden.assign(tab.cols, false);

  for (std::size_t i = 0; i < m; ++i) {
    const bool flip = !(bhat[i] > 0.0);
    const double sgn = flip ? -1.0 : 1.0;
    for (std::size_t j = 0; j < q; ++j) tab.at(i, j) = sgn * constraints[i].a[j];
    tab.at(i, q + i) = sgn * -1.0;  // surplus
    tab.rhs(i) = sgn * bhat[i];
    if (flip) {
      tab.basis[i] = q + i;  // surplus basic at -bhat >= 0
    } else {
      tab.at(i, artificial_col[i]) = 1.0;
      tab.basis[i] = artificial_col[i];
    }
  }
  for (std::size_t j = 0; j < q; ++j) {
    const std::size_t r = m + j;
    tab.at(r, j) = 1.0;
    tab.at(r, q + m + j) = 1.0;  // slack for xh_j <= upper_j - lower_j
    tab.rhs(r) = upper[j] - lower[j];
    tab.basis[r] = q + m + j;
  }

  if (n_art > 0) {
    Vector phase1(tab.cols, 0.0);
    for (std::size_t j = base_cols; j < tab.cols; ++j) phase1[j] = 1.0;
    const double infeas = run_simplex(tab, phase1, tol);
    if (infeas > tol.lp_feas_tol * bscale)
      throw Infeasible("solve_lp: constraints are inconsistent with the box");
    // Drive any artificial still basic (at zero) out of the basis.
    for (std::size_t i = 0; i < rows; ++i) {
      if (tab.basis[i] < base_cols) continue;
      std::size_t pc = base_cols;
      for (std::size_t j = 0; j < base_cols; ++j) {
        if (std::abs(tab.t[i][j]) > tol.lp_pivot_tol) { pc = j; break; }
      }
      if (pc < base_cols) {
        tab.pivot(i, pc);
      }
      // A fully zero row is redundant; the artificial stays basic at zero and
      // its column is barred below, which freezes the row.
    }
    for (std::size_t j = base_cols; j < tab.cols; ++j) tab.forbidden[j] = true;
  }

  Vector phase2(tab.cols, 0.0);
  for (std::size_t j = 0; j < q; ++j) phase2[j] = c[j];
  run_simplex(tab, phase2, tol);

  LpResult res;
  res.y = lower;
  for (std::size_t i = 0; i < rows; ++i)
    if (tab.basis[i] < q) res.y[tab.basis[i]] = lower[tab.basis[i]] + tab.rhs(i);
  res.value = dot(c, res.y);
  return res;
}

} // namespace stabcert::numerics
