#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stagebench {

enum class Errc {
  invalid_argument,
  not_initialized,
  transport,
  startup,
  validation,
  stall,
  io,
  empty_report,
};

std::string_view to_string(Errc code) noexcept;

// Single exception type for the whole library; callers branch on code().
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] void throw_errno(Errc code, const std::string &context);

} // namespace stagebench
