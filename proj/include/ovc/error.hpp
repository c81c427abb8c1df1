#pragma once

#include <stdexcept>
#include <string>

namespace ovc {

/// Engine failure carrying a module-qualified code such as "padic.non_unit".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace ovc
