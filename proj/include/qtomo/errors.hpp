#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qtomo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (qubit counts, matrix sizes, table sizes).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix failed one of the density-matrix axioms.
class ValidationError : public Error {
 public:
  enum class Axiom { Hermitian, Positive, Trace };

  ValidationError(Axiom axiom, const std::string& what) : Error(what), axiom_(axiom) {}

  Axiom axiom() const noexcept { return axiom_; }

 private:
  Axiom axiom_;
};

/// Malformed dataset, config, or JSON input. Line is 1-based, 0 if unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Floating-point state went bad (drift, non-finite values).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The request would need more memory or time than is reasonable.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace qtomo
