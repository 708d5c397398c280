#include "stagebench/metrics/timeline.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace stagebench::metrics {

std::string_view to_string(SpanCategory c) noexcept {
  switch (c) {
  case SpanCategory::compute:
    return "compute";
  case SpanCategory::transfer:
    return "transfer";
  case SpanCategory::init:
    return "init";
  case SpanCategory::wait:
    return "wait";
  }
  return "unknown";
}

namespace {

SpanCategory category_of(EventKind k) {
  switch (k) {
  case EventKind::sim_iter:
  case EventKind::ai_iter:
    return SpanCategory::compute;
  case EventKind::read:
  case EventKind::write:
    return SpanCategory::transfer;
  case EventKind::init:
    return SpanCategory::init;
  case EventKind::poll:
    return SpanCategory::wait;
  }
  return SpanCategory::compute;
}

std::string colour(const Span &s) {
  switch (s.category) {
  case SpanCategory::compute:
    return s.kind == "ai_iter" ? "#ff7f0e" : "#1f77b4";
  case SpanCategory::transfer:
    return "#b2182b";
  case SpanCategory::init:
    return "#8c8c8c";
  case SpanCategory::wait:
    return "#d9d9d9";
  }
  return "#000000";
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out.push_back(c);
    }
  }
  return out;
}

} // namespace

Timeline build_timeline(const std::vector<EventRecord> &events, const TimelineOptions &opts) {
  std::map<std::string, std::vector<const EventRecord *>> by_component;
  for (const auto &ev : events) {
    if (ev.t_end() < opts.t0 || ev.t_start > opts.t1) {
      continue;
    }
    by_component[ev.component].push_back(&ev);
  }

  Timeline tl;
  bool first = true;
  for (auto &[component, evs] : by_component) {
    std::stable_sort(evs.begin(), evs.end(),
                     [](const auto *a, const auto *b) { return a->t_start < b->t_start; });
    Lane lane;
    lane.component = component;
    for (const auto *ev : evs) {
      const auto cat = category_of(ev->kind);
      const std::string kind(to_string(ev->kind));
      if (cat == SpanCategory::compute && !lane.spans.empty()) {
        // Merge with the latest compute span of the same kind if contiguous.
        auto it = std::find_if(lane.spans.rbegin(), lane.spans.rend(), [&](const Span &s) {
          return s.category == SpanCategory::compute && s.kind == kind;
        });
        if (it != lane.spans.rend() && ev->t_start - it->t_end <= opts.merge_gap &&
            std::none_of(lane.spans.rbegin(), it, [](const Span &s) {
              return s.category == SpanCategory::init;
            })) {
          it->t_end = std::max(it->t_end, ev->t_end());
          ++it->merged;
          continue;
        }
      }
      Span s;
      s.category = cat;
      s.kind = kind;
      s.t_start = ev->t_start;
      s.t_end = ev->t_end();
      s.key = ev->key;
      lane.spans.push_back(std::move(s));
    }
    for (const auto &s : lane.spans) {
      if (first) {
        tl.t0 = s.t_start;
        tl.t1 = s.t_end;
        first = false;
      }
      tl.t0 = std::min(tl.t0, s.t_start);
      tl.t1 = std::max(tl.t1, s.t_end);
    }
    tl.lanes.push_back(std::move(lane));
  }
  if (opts.t0 > -1e299) {
    tl.t0 = std::max(tl.t0, opts.t0);
  }
  if (opts.t1 < 1e299) {
    tl.t1 = std::min(tl.t1, opts.t1);
  }
  return tl;
}

std::string to_json(const Timeline &tl) {
  nlohmann::ordered_json j;
  j["t0"] = tl.t0;
  j["t1"] = tl.t1;
  auto lanes = nlohmann::ordered_json::array();
  for (const auto &lane : tl.lanes) {
    auto spans = nlohmann::ordered_json::array();
    for (const auto &s : lane.spans) {
      nlohmann::ordered_json js{{"category", std::string(to_string(s.category))},
                                {"kind", s.kind},
                                {"t_start", s.t_start},
                                {"t_end", s.t_end}};
      if (s.merged > 1) {
        js["merged"] = s.merged;
      }
      if (s.key) {
        js["key"] = *s.key;
      }
      spans.push_back(std::move(js));
    }
    lanes.push_back({{"component", lane.component}, {"spans", std::move(spans)}});
  }
  j["lanes"] = std::move(lanes);
  return j.dump(1) + "\n";
}

std::string to_svg(const Timeline &tl, const std::string &title) {
  constexpr double kLeft = 110.0;
  constexpr double kPlotWidth = 1000.0;
  constexpr double kLaneHeight = 36.0;
  constexpr double kLaneGap = 14.0;
  constexpr double kTop = 40.0;
  const double height = kTop + static_cast<double>(tl.lanes.size()) * (kLaneHeight + kLaneGap) + 60.0;
  const double span = tl.t1 > tl.t0 ? tl.t1 - tl.t0 : 1.0;
  auto x_of = [&](double t) { return kLeft + (t - tl.t0) / span * kPlotWidth; };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      kLeft + kPlotWidth + 20.0, height);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out += fmt::format("<text x=\"{:.0f}\" y=\"20\" font-size=\"14\">{}</text>\n", kLeft,
                       xml_escape(title));
  }

  double y = kTop;
  for (const auto &lane : tl.lanes) {
    out += fmt::format("<text x=\"8\" y=\"{:.1f}\">{}</text>\n", y + kLaneHeight / 2 + 4,
                       xml_escape(lane.component));
    out += fmt::format("<g class=\"lane\" data-component=\"{}\">\n", xml_escape(lane.component));
    // Transfers last so the thin marks stay visible on top of compute.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto &s : lane.spans) {
        const bool transfer = s.category == SpanCategory::transfer;
        if (transfer != (pass == 1)) {
          continue;
        }
        const double x0 = x_of(std::max(s.t_start, tl.t0));
        const double x1 = x_of(std::min(s.t_end, tl.t1));
        const double w = std::max(x1 - x0, transfer ? 1.5 : 0.5);
        out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.1f}\" width=\"{:.2f}\" height=\"{:.1f}\" "
                           "fill=\"{}\"><title>{}{}</title></rect>\n",
                           x0, y, w, kLaneHeight, colour(s), s.kind,
                           s.key ? " " + xml_escape(*s.key) : std::string());
      }
    }
    out += "</g>\n";
    y += kLaneHeight + kLaneGap;
  }

  // Time axis with ~10 ticks.
  const double axis_y = y + 4;
  out += fmt::format("<line x1=\"{:.0f}\" y1=\"{:.1f}\" x2=\"{:.0f}\" y2=\"{:.1f}\" "
                     "stroke=\"black\"/>\n",
                     kLeft, axis_y, kLeft + kPlotWidth, axis_y);
  const double raw = span / 10.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double step = raw / mag < 2 ? 2 * mag : (raw / mag < 5 ? 5 * mag : 10 * mag);
  for (double t = std::ceil(tl.t0 / step) * step; t <= tl.t1 + 1e-12; t += step) {
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1:.1f}\" x2=\"{0:.2f}\" y2=\"{2:.1f}\" "
                       "stroke=\"black\"/><text x=\"{0:.2f}\" y=\"{3:.1f}\" "
                       "text-anchor=\"middle\">{4:g}</text>\n",
                       x_of(t), axis_y, axis_y + 5, axis_y + 18, t);
  }
  out += fmt::format("<text x=\"{:.0f}\" y=\"{:.1f}\" text-anchor=\"middle\">time (s)</text>\n",
                     kLeft + kPlotWidth / 2, axis_y + 34);
  out += "</svg>\n";
  return out;
}

} // namespace stagebench::metrics
