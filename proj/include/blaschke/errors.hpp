#pragma once

#include <stdexcept>
#include <string>

namespace blaschke {

enum class ErrorKind {
  bad_argument,        // index/dimension/config misuse
  domain,              // point outside chart domain, log of nonpositive value, ...
  not_exact,           // no exact result exists in rational mode
  insufficient_order,  // jet order too low for the requested derivative
  rank_deficient,      // Jacobian rank collapse or singular linear system
  not_definite,        // second form or metric fails definiteness
  solve_residual,      // an overdetermined solve left a residual above tolerance
};

class ComputeError : public std::runtime_error {
 public:
  ComputeError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw ComputeError(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace blaschke
