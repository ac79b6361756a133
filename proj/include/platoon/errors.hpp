#pragma once

#include <stdexcept>
#include <string>

namespace platoon {

/// Broad failure categories. The CLI maps each one to a distinct exit status.
enum class ErrorKind {
  Config,           ///< invalid inputs or violated preconditions
  NotApplicable,    ///< operation does not apply to the given inputs
  Numerical,        ///< degenerate evaluation, blowup, failed certification
  SearchExhausted,  ///< bounded search finished without a result
  Io,               ///< filesystem problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class NotApplicableError : public Error {
 public:
  explicit NotApplicableError(const std::string& what)
      : Error(ErrorKind::NotApplicable, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

class SearchExhaustedError : public Error {
 public:
  explicit SearchExhaustedError(const std::string& what)
      : Error(ErrorKind::SearchExhausted, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Simulation state left the plausible range; carries the time of divergence.
class BlowupError : public NumericalError {
 public:
  BlowupError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Process exit status for an error category (0 is success, 1 is unexpected).
inline int exit_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Numerical: return 3;
    case ErrorKind::Io: return 4;
    case ErrorKind::NotApplicable: return 5;
    case ErrorKind::SearchExhausted: return 6;
  }
  return 1;
}

}  // namespace platoon
