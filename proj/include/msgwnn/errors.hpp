#pragma once

#include <stdexcept>
#include <string>

namespace msgwnn {

/// Base class for all library errors. The CLI maps subclasses to exit codes:
/// ArgumentError -> 2, IoError -> 3, ValidationError -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

struct InvalidGraph : ValidationError {
  explicit InvalidGraph(const std::string& what) : ValidationError(what) {}
};

struct ZeroDegreeNode : ValidationError {
  int node;
  explicit ZeroDegreeNode(int i)
      : ValidationError("node " + std::to_string(i) +
                        " has zero degree; isolated nodes need a self-loop"),
        node(i) {}
};

struct DimensionMismatch : ValidationError {
  explicit DimensionMismatch(const std::string& what) : ValidationError(what) {}
};

struct ConvergenceFailure : ValidationError {
  double residual;
  ConvergenceFailure(const std::string& what, double res)
      : ValidationError(what + " (residual " + std::to_string(res) + ")"),
        residual(res) {}
};

struct ScaleOverflow : ValidationError {
  explicit ScaleOverflow(const std::string& what) : ValidationError(what) {}
};

struct DegenerateSpectrum : ValidationError {
  explicit DegenerateSpectrum(const std::string& what) : ValidationError(what) {}
};

struct SpectrumBoundViolation : ValidationError {
  explicit SpectrumBoundViolation(const std::string& what) : ValidationError(what) {}
};

struct NotDivisible : ValidationError {
  NotDivisible(int h, int w, int r)
      : ValidationError("image " + std::to_string(h) + "x" + std::to_string(w) +
                        " not divisible by patch size " + std::to_string(r)) {}
};

struct ShapeMismatch : ValidationError {
  explicit ShapeMismatch(const std::string& what) : ValidationError(what) {}
};

struct InvalidSpec : ValidationError {
  explicit InvalidSpec(const std::string& what) : ValidationError(what) {}
};

struct ClassTooSmall : ValidationError {
  explicit ClassTooSmall(const std::string& what) : ValidationError(what) {}
};

struct InconsistentDataset : ValidationError {
  explicit InconsistentDataset(const std::string& what) : ValidationError(what) {}
};

}  // namespace msgwnn
