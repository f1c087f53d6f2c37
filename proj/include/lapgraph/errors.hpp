#pragma once

#include <stdexcept>
#include <string>

namespace lapgraph {

/// Malformed input: bad shapes, broken invariants, unparsable files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by log_gdet when the Laplacian has more than one zero eigenvalue.
class DisconnectedGraphError : public std::runtime_error {
 public:
  DisconnectedGraphError(const std::string& what, int nullity)
      : std::runtime_error(what), nullity_(nullity) {}
  int nullity() const noexcept { return nullity_; }

 private:
  int nullity_;
};

}  // namespace lapgraph
