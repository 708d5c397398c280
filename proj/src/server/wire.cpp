#include "stagebench/server/wire.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace stagebench::wire {

std::optional<Opcode> opcode_from_byte(std::uint8_t b) noexcept {
  switch (b) {
  case 0x01:
  case 0x02:
  case 0x03:
  case 0x04:
  case 0x05:
  case 0x06:
  case 0x7F:
    return static_cast<Opcode>(b);
  default:
    return std::nullopt;
  }
}

void put_u32_be(std::uint8_t *dst, std::uint32_t v) noexcept {
  for (int i = 3; i >= 0; --i) {
    dst[i] = static_cast<std::uint8_t>(v & 0xFF);
    v >>= 8;
  }
}

void put_u64_be(std::uint8_t *dst, std::uint64_t v) noexcept {
  for (int i = 7; i >= 0; --i) {
    dst[i] = static_cast<std::uint8_t>(v & 0xFF);
    v >>= 8;
  }
}

std::uint32_t get_u32_be(const std::uint8_t *src) noexcept {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v = (v << 8) | src[i];
  }
  return v;
}

std::uint64_t get_u64_be(const std::uint8_t *src) noexcept {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v = (v << 8) | src[i];
  }
  return v;
}

Bytes encode_request_header(Opcode op, std::string_view key, std::uint64_t value_len) {
  const bool with_value = op == Opcode::put;
  Bytes out(1 + 4 + key.size() + (with_value ? 8 : 0));
  out[0] = static_cast<std::uint8_t>(op);
  put_u32_be(out.data() + 1, static_cast<std::uint32_t>(key.size()));
  std::memcpy(out.data() + 5, key.data(), key.size());
  if (with_value) {
    put_u64_be(out.data() + 5 + key.size(), value_len);
  }
  return out;
}

Bytes encode_request(const Request &req) {
  Bytes out = encode_request_header(req.op, req.key, req.value.size());
  if (req.op == Opcode::put) {
    out.insert(out.end(), req.value.begin(), req.value.end());
  }
  return out;
}

Bytes encode_response_header(Status status, std::uint64_t payload_len) {
  Bytes out(response_header_len);
  out[0] = static_cast<std::uint8_t>(status);
  put_u64_be(out.data() + 1, payload_len);
  return out;
}

Bytes encode_response(const Response &resp) {
  Bytes out = encode_response_header(resp.status, resp.payload.size());
  out.insert(out.end(), resp.payload.begin(), resp.payload.end());
  return out;
}

bool ByteSource::discard(std::uint64_t n) {
  std::array<std::uint8_t, 64 * 1024> sink{};
  while (n > 0) {
    const auto chunk = static_cast<std::size_t>(std::min<std::uint64_t>(n, sink.size()));
    if (!read_exact(sink.data(), chunk)) {
      return false;
    }
    n -= chunk;
  }
  return true;
}

bool MemorySource::read_exact(std::uint8_t *dst, std::size_t n) {
  if (remaining() < n) {
    pos_ = data_.size();
    return false;
  }
  std::memcpy(dst, data_.data() + pos_, n);
  pos_ += n;
  return true;
}

namespace {

bool key_required(Opcode op) noexcept {
  return op == Opcode::put || op == Opcode::get || op == Opcode::exists || op == Opcode::del;
}

} // namespace

Frame read_request(ByteSource &src) {
  std::uint8_t op_byte = 0;
  if (!src.read_exact(&op_byte, 1)) {
    return EndOfStream{};
  }
  const auto op = opcode_from_byte(op_byte);
  if (!op) {
    return Malformed{"unknown opcode " + std::to_string(op_byte)};
  }
  std::uint8_t len_buf[8];
  if (!src.read_exact(len_buf, 4)) {
    return Malformed{"truncated key length"};
  }
  const std::uint32_t key_len = get_u32_be(len_buf);

  std::string key;
  bool oversize_key = key_len > max_key_len;
  if (oversize_key) {
    if (!src.discard(key_len)) {
      return Malformed{"truncated key"};
    }
  } else {
    key.resize(key_len);
    if (key_len > 0 && !src.read_exact(reinterpret_cast<std::uint8_t *>(key.data()), key_len)) {
      return Malformed{"truncated key"};
    }
  }

  Request req;
  req.op = *op;
  if (*op == Opcode::put) {
    if (!src.read_exact(len_buf, 8)) {
      return Malformed{"truncated value length"};
    }
    const std::uint64_t value_len = get_u64_be(len_buf);
    if (value_len > max_value_len || oversize_key) {
      if (!src.discard(value_len)) {
        return Malformed{"truncated value"};
      }
      return Rejected{value_len > max_value_len ? "value too large" : "key too large"};
    }
    req.value.resize(static_cast<std::size_t>(value_len));
    if (value_len > 0 && !src.read_exact(req.value.data(), req.value.size())) {
      return Malformed{"truncated value"};
    }
  }
  if (oversize_key) {
    return Rejected{"key too large"};
  }
  if (key_required(*op) &&
      (key.empty() || key.find('\0') != std::string::npos)) {
    return Rejected{"invalid key"};
  }
  req.key = std::move(key);
  return req;
}

std::optional<Response> read_response(ByteSource &src) {
  std::uint8_t header[response_header_len];
  if (!src.read_exact(header, response_header_len)) {
    return std::nullopt;
  }
  if (header[0] > static_cast<std::uint8_t>(Status::err)) {
    return std::nullopt;
  }
  Response resp;
  resp.status = static_cast<Status>(header[0]);
  const std::uint64_t len = get_u64_be(header + 1);
  if (len > max_value_len) {
    return std::nullopt;
  }
  resp.payload.resize(static_cast<std::size_t>(len));
  if (len > 0 && !src.read_exact(resp.payload.data(), resp.payload.size())) {
    return std::nullopt;
  }
  return resp;
}

} // namespace stagebench::wire
