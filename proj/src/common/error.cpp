#include "stagebench/common/error.hpp"

#include <cerrno>
#include <cstring>

namespace stagebench {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
  case Errc::invalid_argument:
    return "invalid-argument";
  case Errc::not_initialized:
    return "not-initialized";
  case Errc::transport:
    return "transport";
  case Errc::startup:
    return "startup";
  case Errc::validation:
    return "validation";
  case Errc::stall:
    return "stall";
  case Errc::io:
    return "io";
  case Errc::empty_report:
    return "empty-report";
  }
  return "unknown";
}

void throw_errno(Errc code, const std::string &context) {
  const int err = errno;
  throw Error(code, context + ": " + std::strerror(err));
}

} // namespace stagebench
