#pragma once

#include <stdexcept>
#include <string>

namespace isoblock {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad exponents, wrong lengths, points off the unit cube.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EmptyBlock : public Error {
 public:
  EmptyBlock() : Error("block contains no design points") {}
};

class NoFeasibleBlock : public Error {
 public:
  NoFeasibleBlock() : Error("no rectangle around the query point intersects the data") {}
};

class DegenerateBoundary : public Error {
 public:
  explicit DegenerateBoundary(int ell)
      : Error("kappa* undefined: equality at index " + std::to_string(ell)), index(ell) {}
  int index;
};

class MixedDerivativesPresent : public Error {
 public:
  MixedDerivativesPresent()
      : Error("nonzero critical mixed derivatives; K does not factor, use the full drift") {}
};

class NonFiniteField : public Error {
 public:
  NonFiniteField() : Error("non-finite value in sampled field") {}
};

class ZeroNoise : public Error {
 public:
  ZeroNoise() : Error("noise level must be positive") {}
};

class DegenerateFit : public Error {
 public:
  DegenerateFit() : Error("rate fit undefined: non-positive median error") {}
};

}  // namespace isoblock
