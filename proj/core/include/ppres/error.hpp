#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ppres {

// All toolkit failures carry a stable machine-readable code alongside the
// human message. Codes are kebab-case slugs ("domain-error", "fit-failed", ...)
// and end up verbatim in the CLI's error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
  throw Error(std::move(code), message);
}

inline void require(bool ok, const char* code, const std::string& message) {
  if (!ok) throw Error(code, message);
}

}  // namespace ppres
