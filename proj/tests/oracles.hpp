#pragma once

// Independent test oracles: everything here recomputes expected values by a
// route that does not share code with the implementation it checks.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "stabcert/matrix.hpp"

namespace oracles {

using stabcert::Matrix;
using stabcert::Vector;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Matrix random_matrix(std::size_t n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = gauss(gen);
  return m;
}

inline Matrix random_symmetric(std::size_t n, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = gauss(gen);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

// G'G + I: SPD by construction.
inline Matrix random_spd(std::size_t n, std::mt19937_64& gen, double scale = 1.0) {
  const Matrix g = random_matrix(n, gen, scale);
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += g(k, i) * g(k, j);
      m(i, j) = s;
    }
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
  return m;
}

inline Vector random_unit(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  double nn = 0.0;
  do {
    nn = 0.0;
    for (double& x : v) {
      x = gauss(gen);
      nn += x * x;
    }
  } while (nn == 0.0);
  const double inv = 1.0 / std::sqrt(nn);
  for (double& x : v) x *= inv;
  return v;
}

inline double rayleigh(const Matrix& a, const Matrix& b, const Vector& v) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double ai = 0.0;
    double bi = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      ai += a(i, j) * v[j];
      bi += b(i, j) * v[j];
    }
    num += v[i] * ai;
    den += v[i] * bi;
  }
  return num / den;
}

struct RayleighSearch {
  double best = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  bool dominated = true;  // candidate <= every sampled quotient
};

// Brute-force minimum Rayleigh quotient over randomly generated directions:
// a batch of uniform directions followed by random local perturbations around
// the best direction so far (annealed step sizes). Only quotients at random
// vectors are ever computed, so this is independent of any eigensolver.
inline RayleighSearch rayleigh_min_search(const Matrix& a, const Matrix& b,
                                          std::size_t budget, std::mt19937_64& gen,
                                          double candidate) {
  const std::size_t n = a.rows();
  std::normal_distribution<double> gauss(0.0, 1.0);
  RayleighSearch out;
  Vector best_v = random_unit(n, gen);
  out.best = rayleigh(a, b, best_v);
  out.samples = 1;
  if (candidate > out.best + 1e-12) out.dominated = false;
  const std::size_t uniform = budget / 2;
  for (std::size_t s = 1; s < uniform; ++s) {
    const Vector v = random_unit(n, gen);
    const double q = rayleigh(a, b, v);
    ++out.samples;
    if (candidate > q + 1e-12) out.dominated = false;
    if (q < out.best) {
      out.best = q;
      best_v = v;
    }
  }
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  double step = 0.5;
  while (out.samples < budget) {
    Vector v = best_v;
    for (double& x : v) x += step * gauss(gen) / sqrt_n;
    double nn = 0.0;
    for (double x : v) nn += x * x;
    if (nn == 0.0) continue;
    const double inv = 1.0 / std::sqrt(nn);
    for (double& x : v) x *= inv;
    const double q = rayleigh(a, b, v);
    ++out.samples;
    if (candidate > q + 1e-12) out.dominated = false;
    if (q < out.best) {
      out.best = q;
      best_v = v;
      step = std::min(step * 1.2, 1.0);
    } else {
      step = std::max(step * 0.98, 1e-7);
    }
  }
  return out;
}

// Exhaustive vertex enumeration for min c'y over a box intersected with
// half-spaces a'y >= b. Every vertex activates Q constraints; solve each
// Q x Q system by local Gaussian elimination and keep the best feasible one.
struct LpOracle {
  bool feasible = false;
  double value = std::numeric_limits<double>::infinity();
  Vector argmin;
};

inline LpOracle lp_vertex_enumeration(const Vector& c, const Vector& lower, const Vector& upper,
                                      const std::vector<std::pair<Vector, double>>& constraints) {
  const std::size_t q = c.size();
  // Rows: a'y = rhs candidates (box faces and constraint boundaries).
  std::vector<Vector> rows;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < q; ++i) {
    Vector e(q, 0.0);
    e[i] = 1.0;
    rows.push_back(e);
    rhs.push_back(lower[i]);
    rows.push_back(e);
    rhs.push_back(upper[i]);
  }
  for (const auto& [a, b] : constraints) {
    rows.push_back(a);
    rhs.push_back(b);
  }
  LpOracle out;
  std::vector<std::size_t> pick(q, 0);
  std::function<void(std::size_t, std::size_t)> recurse = [&](std::size_t start, std::size_t depth) {
    if (depth == q) {
      // Solve the q x q active system by Gaussian elimination with pivoting.
      std::vector<Vector> m(q, Vector(q + 1, 0.0));
      for (std::size_t r = 0; r < q; ++r) {
        for (std::size_t cidx = 0; cidx < q; ++cidx) m[r][cidx] = rows[pick[r]][cidx];
        m[r][q] = rhs[pick[r]];
      }
      for (std::size_t k = 0; k < q; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < q; ++r)
          if (std::abs(m[r][k]) > std::abs(m[piv][k])) piv = r;
        if (std::abs(m[piv][k]) < 1e-12) return;
        std::swap(m[k], m[piv]);
        for (std::size_t r = 0; r < q; ++r) {
          if (r == k) continue;
          const double f = m[r][k] / m[k][k];
          for (std::size_t cidx = k; cidx <= q; ++cidx) m[r][cidx] -= f * m[k][cidx];
        }
      }
      Vector y(q);
      for (std::size_t k = 0; k < q; ++k) y[k] = m[k][q] / m[k][k];
      for (std::size_t i = 0; i < q; ++i)
        if (y[i] < lower[i] - 1e-8 || y[i] > upper[i] + 1e-8) return;
      for (const auto& [a, b] : constraints) {
        double s = 0.0;
        for (std::size_t i = 0; i < q; ++i) s += a[i] * y[i];
        if (s < b - 1e-8) return;
      }
      double value = 0.0;
      for (std::size_t i = 0; i < q; ++i) value += c[i] * y[i];
      if (!out.feasible || value < out.value) {
        out.feasible = true;
        out.value = value;
        out.argmin = y;
      }
      return;
    }
    for (std::size_t i = start; i < rows.size(); ++i) {
      pick[depth] = i;
      recurse(i + 1, depth + 1);
    }
  };
  recurse(0, 0);
  return out;
}

// Random expression generator that produces a source string together with an
// independent evaluator built from closures (never touching the parser).
struct GeneratedExpr {
  std::string source;
  std::function<double(const Vector&)> eval;
};

inline GeneratedExpr random_expression(int p, std::mt19937_64& gen, int depth = 0) {
  std::uniform_int_distribution<int> kind_dist(0, depth >= 4 ? 1 : 6);
  std::uniform_real_distribution<double> const_dist(0.0, 8.0);
  std::uniform_int_distribution<int> param_dist(1, p);
  std::uniform_int_distribution<int> exp_dist(0, 3);
  switch (kind_dist(gen)) {
    case 0: {
      const double v = const_dist(gen);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return {buf, [v](const Vector&) { return v; }};
    }
    case 1: {
      const int k = param_dist(gen);
      return {"mu" + std::to_string(k),
              [k](const Vector& mu) { return mu[static_cast<std::size_t>(k) - 1]; }};
    }
    case 2: {
      auto a = random_expression(p, gen, depth + 1);
      auto b = random_expression(p, gen, depth + 1);
      return {"(" + a.source + ")+(" + b.source + ")",
              [a, b](const Vector& mu) { return a.eval(mu) + b.eval(mu); }};
    }
    case 3: {
      auto a = random_expression(p, gen, depth + 1);
      auto b = random_expression(p, gen, depth + 1);
      return {"(" + a.source + ")-(" + b.source + ")",
              [a, b](const Vector& mu) { return a.eval(mu) - b.eval(mu); }};
    }
    case 4: {
      auto a = random_expression(p, gen, depth + 1);
      auto b = random_expression(p, gen, depth + 1);
      return {"(" + a.source + ")*(" + b.source + ")",
              [a, b](const Vector& mu) { return a.eval(mu) * b.eval(mu); }};
    }
    case 5: {
      auto a = random_expression(p, gen, depth + 1);
      double d = 0.0;
      while (std::abs(d) < 0.25) d = const_dist(gen) - 4.0;
      char buf[80];
      std::snprintf(buf, sizeof(buf), "(%.17g)", std::abs(d));
      const std::string divisor = (d < 0 ? "(-" + std::string(buf) + ")" : std::string(buf));
      return {"(" + a.source + ")/" + divisor,
              [a, d](const Vector& mu) { return a.eval(mu) / d; }};
    }
    default: {
      auto a = random_expression(p, gen, depth + 1);
      const int e = exp_dist(gen);
      return {"(" + a.source + ")^" + std::to_string(e), [a, e](const Vector& mu) {
                double r = 1.0;
                const double base = a.eval(mu);
                double acc = base;
                int k = e;
                while (k > 0) {
                  if (k & 1) r *= acc;
                  acc *= acc;
                  k >>= 1;
                }
                return r;
              }};
    }
  }
}

} // namespace oracles
