#pragma once

// Length-prefixed binary protocol spoken between DataStore clients and the
// in-memory staging server. All length fields are big-endian.
//
//   request:  opcode u8 | key_len u32 | key | [value_len u64 | value]   (value: PUT only)
//   response: status u8 | payload_len u64 | payload

#include "stagebench/common/bytes.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace stagebench::wire {

enum class Opcode : std::uint8_t {
  put = 0x01,
  get = 0x02,
  exists = 0x03,
  del = 0x04,
  list = 0x05,
  ping = 0x06,
  shutdown = 0x7F,
};

enum class Status : std::uint8_t {
  ok = 0x00,
  not_found = 0x01,
  err = 0x02,
};

inline constexpr std::size_t max_key_len = 1024;
inline constexpr std::uint64_t max_value_len = 0x7FFFFFFFull;
inline constexpr std::size_t response_header_len = 9;

struct Request {
  Opcode op = Opcode::ping;
  std::string key;
  Bytes value;
};

struct Response {
  Status status = Status::ok;
  Bytes payload;

  friend bool operator==(const Response &, const Response &) = default;
};

std::optional<Opcode> opcode_from_byte(std::uint8_t b) noexcept;

void put_u32_be(std::uint8_t *dst, std::uint32_t v) noexcept;
void put_u64_be(std::uint8_t *dst, std::uint64_t v) noexcept;
std::uint32_t get_u32_be(const std::uint8_t *src) noexcept;
std::uint64_t get_u64_be(const std::uint8_t *src) noexcept;

// Everything of a request except the value bytes, so large PUT payloads can
// be sent straight from the caller's buffer.
Bytes encode_request_header(Opcode op, std::string_view key, std::uint64_t value_len);
Bytes encode_request(const Request &req);

Bytes encode_response_header(Status status, std::uint64_t payload_len);
Bytes encode_response(const Response &resp);

// Source of request bytes; lets the frame parser run over sockets and over
// in-memory buffers alike.
class ByteSource {
public:
  virtual ~ByteSource() = default;
  // False on EOF/error before n bytes were read.
  virtual bool read_exact(std::uint8_t *dst, std::size_t n) = 0;
  bool discard(std::uint64_t n);
};

class MemorySource final : public ByteSource {
public:
  explicit MemorySource(ByteView data) : data_(data) {}
  bool read_exact(std::uint8_t *dst, std::size_t n) override;
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

private:
  ByteView data_;
  std::size_t pos_ = 0;
};

// Outcome of reading one frame.
struct EndOfStream {};
// Framing is unrecoverable; reply ERR and close the connection.
struct Malformed {
  std::string reason;
};
// Frame fully consumed but rejected (oversize or invalid key); reply ERR and
// keep the connection open.
struct Rejected {
  std::string reason;
};
using Frame = std::variant<Request, EndOfStream, Malformed, Rejected>;

Frame read_request(ByteSource &src);

// Reads one response frame. nullopt on EOF/short read.
std::optional<Response> read_response(ByteSource &src);

} // namespace stagebench::wire
