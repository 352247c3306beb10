#pragma once

#include <stdexcept>
#include <string>

namespace mnlb {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed arguments: size mismatches, out-of-range indices, non-finite or
// non-positive data where positivity is required.
class InvalidInputError : public Error {
  public:
    using Error::Error;
};

// The likelihood has no finite maximizer or is not identified, e.g. a product
// that was never offered. The message names the offending product.
class EstimationUndefinedError : public Error {
  public:
    using Error::Error;
};

// Confidence radius requested for a product with zero observations.
class UndefinedRadiusError : public Error {
  public:
    using Error::Error;
};

class InfeasibleLpError : public Error {
  public:
    using Error::Error;
};

class UnboundedLpError : public Error {
  public:
    using Error::Error;
};

// Exhaustive enumeration asked for more products than the guard allows.
class SizeGuardError : public Error {
  public:
    using Error::Error;
};

// Operation applied to a simulation in the wrong phase, e.g. offering after
// the market stopped.
class LifecycleError : public Error {
  public:
    using Error::Error;
};

// Switch budget too small to run even one planning cycle.
class InvalidBudgetError : public Error {
  public:
    using Error::Error;
};

// A structural precondition does not hold, e.g. distribution recovery from a
// solution that is not a basic optimal one.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

}  // namespace mnlb
