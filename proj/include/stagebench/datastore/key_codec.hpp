#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace stagebench::datastore {

inline constexpr std::size_t max_key_bytes = 1024;

// Throws Error(invalid_argument) unless the key is non-empty, NUL-free and
// at most max_key_bytes long.
void validate_key(std::string_view key);

// Percent-encodes every byte outside [A-Za-z0-9._-] as %XX (uppercase hex).
std::string encode_key(std::string_view key);

// Inverse of encode_key; nullopt for tokens encode_key cannot produce.
std::optional<std::string> decode_key(std::string_view token);

} // namespace stagebench::datastore
