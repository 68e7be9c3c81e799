#ifndef GKDVLAB_ERRORS_HPP
#define GKDVLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gkdvlab {

// Base for all library errors. exit_code() maps onto the CLI contract:
// 1 = usage error, 2 = numerical-contract failure, 3 = blow-up.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
  virtual int exit_code() const { return 2; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 1; }
};

// Weight blend could not satisfy positivity/monotonicity/integral at once.
class ConstructionFailed : public Error {
 public:
  using Error::Error;
};

class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

class InvalidParameters : public Error {
 public:
  using Error::Error;
};

// A (solution, nonlinearity) pairing that is not one of the sanctioned ones.
class MismatchedPair : public Error {
 public:
  using Error::Error;
};

class UnderflowWindow : public Error {
 public:
  using Error::Error;
};

// Field tails touch the grid boundary beyond tolerance.
class BoundaryLeak : public Error {
 public:
  using Error::Error;
};

class InvalidEnsemble : public Error {
 public:
  using Error::Error;
};

class InsufficientCadence : public Error {
 public:
  using Error::Error;
};

}  // namespace gkdvlab

#endif
