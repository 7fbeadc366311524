#pragma once

#include <stdexcept>
#include <string>

namespace dpack {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input failed structural validation (malformed file, bad field, invariant).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NotWatertight : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class LoopClosureViolation : public Error {
 public:
  using Error::Error;
};

class UnknownJoint : public Error {
 public:
  using Error::Error;
};

class NoAdmissibleConfiguration : public Error {
 public:
  using Error::Error;
};

class GroupTooLarge : public Error {
 public:
  using Error::Error;
};

class DoesNotFit : public Error {
 public:
  using Error::Error;
};

class EmptyLayout : public Error {
 public:
  using Error::Error;
};

}  // namespace dpack
