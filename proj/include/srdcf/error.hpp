#pragma once

#include <stdexcept>
#include <string>

namespace srdcf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad dimensions, degenerate geometry, out-of-domain arguments.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// A spectrum that should be Hermitian-symmetric is not.
class SymmetryViolation : public Error {
 public:
  using Error::Error;
};

/// Zero pivot or failed factorization; the system is not SPD.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Sequence or annotation files could not be read.
class IngestionError : public Error {
 public:
  using Error::Error;
};

}  // namespace srdcf
