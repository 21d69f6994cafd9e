#pragma once

#include <stdexcept>
#include <string>

namespace renormlab {

// All failures carry a module-qualified code ("pairs.undecided",
// "circlemap.not_monotone", ...) so the CLI can map them to exit codes.
class error : public std::runtime_error {
 public:
  error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace renormlab
