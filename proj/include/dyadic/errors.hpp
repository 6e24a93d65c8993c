#pragma once

#include <stdexcept>
#include <string>

namespace dyadic {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A node, generation or lattice size outside the permitted range.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates a documented constraint (length, finiteness, atom bounds, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Two objects that should live on the same lattice do not.
class MismatchError : public Error {
 public:
  using Error::Error;
};

/// Evaluation outside a candidate's domain, or an incompatible M bound.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A family parameter for which the mixed-derivative bound cannot hold.
class InfeasibleFamilyError : public Error {
 public:
  using Error::Error;
};

/// The duality ratio is 0/0 because one of the norms vanishes.
class UndefinedRatioError : public Error {
 public:
  using Error::Error;
};

}  // namespace dyadic
