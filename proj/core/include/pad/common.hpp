// Shared error taxonomy and small helpers used across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace pad {

enum class ErrorKind {
  schema,     // malformed problem/config/schema input
  domain,     // objective evaluated outside its mathematical domain
  state,      // operation on an object in the wrong lifecycle state
  scale,      // request exceeds a hard enumeration/size budget
  io,         // file format or filesystem failure
  config,     // bad run configuration
  data,       // dataset/labeling pathology (e.g. single-class shards)
  infeasible, // sampling could not produce a feasible instance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

// Relative-slack comparison used for continuous constraints: lhs <= rhs up to
// eps * max(1, |rhs|).  Integer budget constraints compare exactly instead.
inline constexpr double kConsEps = 1e-6;

inline bool leq_slack(double lhs, double rhs, double eps = kConsEps) {
  double m = rhs < 0 ? -rhs : rhs;
  if (m < 1.0) m = 1.0;
  return lhs <= rhs + eps * m;
}

inline bool geq_slack(double lhs, double rhs, double eps = kConsEps) {
  double m = rhs < 0 ? -rhs : rhs;
  if (m < 1.0) m = 1.0;
  return lhs >= rhs - eps * m;
}

}  // namespace pad
