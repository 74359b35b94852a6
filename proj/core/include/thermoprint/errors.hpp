#pragma once

#include <stdexcept>
#include <string>

namespace thermoprint {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// imageio
class FormatError : public Error {
 public:
  using Error::Error;
};
class TruncationError : public Error {
 public:
  using Error::Error;
};
class UnsupportedDepthError : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};

// segmentation / perfusion
class NoFaceError : public Error {
 public:
  NoFaceError() : Error("no face region") {}
  using Error::Error;
};
class ErodedToEmptyError : public Error {
 public:
  explicit ErodedToEmptyError(int iterations);
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

// features / classifier
class BoundsError : public Error {
 public:
  using Error::Error;
};
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};
class ShapeError : public Error {
 public:
  using Error::Error;
};
class DivergenceError : public Error {
 public:
  explicit DivergenceError(int epoch);
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

// synth
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values (learning rate, grid size, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace thermoprint
