#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlgp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// No instruction writes the output register.
class EmptyEffectiveCode : public Error {
 public:
  EmptyEffectiveCode() : Error("genome has no effective code") {}
};

/// A pooling layer met a spatial dimension smaller than its window.
class ShapeExhausted : public Error {
 public:
  ShapeExhausted(std::size_t layer, const std::string& what)
      : Error(what), layer_(layer) {}
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

class NumericalDivergence : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DegenerateResponse : public Error {
 public:
  using Error::Error;
};

class SingularCorrelation : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class ConstantActual : public Error {
 public:
  using Error::Error;
};

class SurrogateUnfittable : public Error {
 public:
  using Error::Error;
};

}  // namespace nlgp
