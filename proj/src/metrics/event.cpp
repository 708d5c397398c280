#include "stagebench/metrics/event.hpp"

#include "stagebench/common/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>

namespace stagebench::metrics {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
  case EventKind::sim_iter:
    return "sim_iter";
  case EventKind::ai_iter:
    return "ai_iter";
  case EventKind::read:
    return "read";
  case EventKind::write:
    return "write";
  case EventKind::poll:
    return "poll";
  case EventKind::init:
    return "init";
  }
  return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view name) noexcept {
  for (auto k : {EventKind::sim_iter, EventKind::ai_iter, EventKind::read, EventKind::write,
                 EventKind::poll, EventKind::init}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  return std::nullopt;
}

void validate(const EventRecord &ev) {
  if (!(ev.duration > 0.0) || !std::isfinite(ev.duration)) {
    throw Error(Errc::invalid_argument, "event duration must be > 0");
  }
  if (!std::isfinite(ev.t_start)) {
    throw Error(Errc::invalid_argument, "event start must be finite");
  }
  if (ev.rank < 0) {
    throw Error(Errc::invalid_argument, "event rank must be >= 0");
  }
  if (is_transfer(ev.kind)) {
    if (ev.bytes == 0 || !ev.key || ev.key->empty()) {
      throw Error(Errc::invalid_argument, "read/write events need bytes > 0 and a key");
    }
  } else if ((is_iteration(ev.kind) || ev.kind == EventKind::poll) && ev.bytes != 0) {
    throw Error(Errc::invalid_argument, "iteration and poll events carry no bytes");
  }
}

namespace {

void append_escaped(std::string &out, std::string_view s) {
  out.push_back('"');
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
    case '"':
      out += "\\\"";
      break;
    case '\\':
      out += "\\\\";
      break;
    case '\n':
      out += "\\n";
      break;
    case '\r':
      out += "\\r";
      break;
    case '\t':
      out += "\\t";
      break;
    default:
      if (c < 0x20) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
        out += buf;
      } else {
        out.push_back(ch);
      }
    }
  }
  out.push_back('"');
}

void append_double(std::string &out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

} // namespace

void append_json_line(std::string &out, const EventRecord &ev) {
  out += "{\"component\":";
  append_escaped(out, ev.component);
  out += ",\"rank\":";
  out += std::to_string(ev.rank);
  out += ",\"kind\":\"";
  out += to_string(ev.kind);
  out += "\",\"t_start\":";
  append_double(out, ev.t_start);
  out += ",\"duration\":";
  append_double(out, ev.duration);
  out += ",\"bytes\":";
  out += std::to_string(ev.bytes);
  out += ",\"key\":";
  if (ev.key) {
    append_escaped(out, *ev.key);
  } else {
    out += "null";
  }
  out.push_back('}');
}

std::string to_json_line(const EventRecord &ev) {
  std::string out;
  append_json_line(out, ev);
  return out;
}

EventRecord parse_event_line(std::string_view line) {
  EventRecord ev;
  try {
    const auto j = nlohmann::json::parse(line);
    ev.component = j.at("component").get<std::string>();
    ev.rank = j.at("rank").get<int>();
    const auto kind = parse_event_kind(j.at("kind").get<std::string>());
    if (!kind) {
      throw Error(Errc::invalid_argument, "unknown event kind");
    }
    ev.kind = *kind;
    ev.t_start = j.at("t_start").get<double>();
    ev.duration = j.at("duration").get<double>();
    ev.bytes = j.at("bytes").get<std::uint64_t>();
    const auto &k = j.at("key");
    if (!k.is_null()) {
      ev.key = k.get<std::string>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::invalid_argument, std::string("bad event line: ") + e.what());
  }
  validate(ev);
  return ev;
}

} // namespace stagebench::metrics
