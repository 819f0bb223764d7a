#pragma once

#include <stdexcept>
#include <string>

namespace kdetl {

// Error carrying a short machine-readable code (e.g. "zero-usable-rows") next
// to the human message. The CLI prints both on a single line.
class Error : public std::runtime_error {
  public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

  private:
    std::string code_;
};

}  // namespace kdetl
