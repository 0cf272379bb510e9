#pragma once

#include <stdexcept>
#include <string>

namespace stabcert {

// Common base so callers can catch everything coming out of the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- numerics ---

// A matrix that must be symmetric positive definite is not (pivot <= 0).
struct NotSPD : Error {
  explicit NotSPD(const std::string& what) : Error(what) {}
};

// Lyapunov solve did not converge / system is singular for the given data.
struct SingularLyapunov : Error {
  explicit SingularLyapunov(const std::string& what) : Error(what) {}
};

// LP feasible region is empty.
struct Infeasible : Error {
  explicit Infeasible(const std::string& what) : Error(what) {}
};

// --- theta ---

struct SyntaxError : Error {
  SyntaxError(const std::string& what, std::size_t position)
      : Error(what + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

struct UnknownParameter : Error {
  UnknownParameter(int index, int p)
      : Error("unknown parameter mu" + std::to_string(index) +
              " (parameter dimension is " + std::to_string(p) + ")"),
        index(index), p(p) {}
  int index;
  int p;
};

// Evaluation produced inf/nan.
struct NonFinite : Error {
  explicit NonFinite(const std::string& what) : Error(what) {}
};

// --- bounds ---

struct DegenerateSimplex : Error {
  explicit DegenerateSimplex(const std::string& what) : Error(what) {}
};

struct NotInAffineHull : Error {
  explicit NotInAffineHull(const std::string& what) : Error(what) {}
};

struct OutsideSimplex : Error {
  explicit OutsideSimplex(const std::string& what) : Error(what) {}
};

struct InsideSimplex : Error {
  explicit InsideSimplex(const std::string& what) : Error(what) {}
};

struct EmptyInput : Error {
  explicit EmptyInput(const std::string& what) : Error(what) {}
};

// --- certify ---

// Theta map falls outside the class the enclosure generator can certify.
struct UnsupportedTheta : Error {
  explicit UnsupportedTheta(const std::string& what) : Error(what) {}
};

// Query point is not covered by the bound mesh.
struct OutsideCover : Error {
  explicit OutsideCover(const std::string& what) : Error(what) {}
};

// --- lyapunov ---

struct MissingVInner : Error {
  explicit MissingVInner(const std::string& what) : Error(what) {}
};

struct NotSymmetric : Error {
  explicit NotSymmetric(const std::string& what) : Error(what) {}
};

// --- io ---

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

} // namespace stabcert
