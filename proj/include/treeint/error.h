#ifndef TREEINT_ERROR_H_
#define TREEINT_ERROR_H_

#include <stdexcept>
#include <string>

namespace treeint {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: model documents, instances, configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

// A polynomial division met an evaluation point where the divisor vanishes.
class SingularPointError : public Error {
 public:
  using Error::Error;
};

// The request exceeds a documented size limit (polynomial degree, oracle
// coalition count).
class LimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace treeint

#endif  // TREEINT_ERROR_H_
