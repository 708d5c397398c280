#include "stagebench/datastore/key_codec.hpp"

#include "stagebench/common/error.hpp"

namespace stagebench::datastore {

namespace {

constexpr bool is_safe(unsigned char c) noexcept {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
         c == '.' || c == '_' || c == '-';
}

int hex_value(char c) noexcept {
  if (c >= '0' && c <= '9') {
    return c - '0';
  }
  if (c >= 'A' && c <= 'F') {
    return c - 'A' + 10;
  }
  return -1;
}

} // namespace

void validate_key(std::string_view key) {
  if (key.empty()) {
    throw Error(Errc::invalid_argument, "key must be non-empty");
  }
  if (key.size() > max_key_bytes) {
    throw Error(Errc::invalid_argument,
                "key exceeds " + std::to_string(max_key_bytes) + " bytes");
  }
  if (key.find('\0') != std::string_view::npos) {
    throw Error(Errc::invalid_argument, "key contains NUL");
  }
}

std::string encode_key(std::string_view key) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(key.size());
  for (const char ch : key) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_safe(c)) {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::optional<std::string> decode_key(std::string_view token) {
  if (token.empty()) {
    return std::nullopt;
  }
  std::string out;
  out.reserve(token.size());
  for (std::size_t i = 0; i < token.size(); ++i) {
    const auto c = static_cast<unsigned char>(token[i]);
    if (c == '%') {
      if (i + 2 >= token.size()) {
        return std::nullopt;
      }
      const int hi = hex_value(token[i + 1]);
      const int lo = hex_value(token[i + 2]);
      if (hi < 0 || lo < 0) {
        return std::nullopt;
      }
      const auto decoded = static_cast<unsigned char>((hi << 4) | lo);
      // A safe byte is never escaped, so an escaped one is not canonical.
      if (is_safe(decoded) || decoded == 0) {
        return std::nullopt;
      }
      out.push_back(static_cast<char>(decoded));
      i += 2;
    } else if (is_safe(c)) {
      out.push_back(static_cast<char>(c));
    } else {
      return std::nullopt;
    }
  }
  return out;
}

} // namespace stagebench::datastore
