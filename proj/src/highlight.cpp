#include "slidesync/highlight.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "slidesync/error.hpp"
#include "slidesync/ingest.hpp"
#include "slidesync/parallel.hpp"

namespace slidesync {

namespace fs = std::filesystem;
using detail::json;

std::string_view to_string(HighlightStyle s) {
  switch (s) {
    case HighlightStyle::bounding_box: return "bounding_box";
    case HighlightStyle::shading: return "shading";
    case HighlightStyle::hide_background: return "hide_background";
    case HighlightStyle::magnify: return "magnify";
  }
  return "unknown";
}

std::optional<HighlightStyle> highlight_style_from_string(std::string_view s) {
  std::string key(s);
  std::replace(key.begin(), key.end(), '-', '_');
  for (auto style : {HighlightStyle::bounding_box, HighlightStyle::shading, HighlightStyle::hide_background,
                     HighlightStyle::magnify})
    if (to_string(style) == key) return style;
  return std::nullopt;
}

std::string_view to_string(GapPolicy g) { return g == GapPolicy::hold_previous ? "hold_previous" : "clear"; }

std::optional<GapPolicy> gap_policy_from_string(std::string_view s) {
  std::string key(s);
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "hold_previous") return GapPolicy::hold_previous;
  if (key == "clear") return GapPolicy::clear;
  return std::nullopt;
}

HighlightSchedule build_schedule(const AlignmentResult& result, const Transcript& transcript, HighlightStyle style,
                                 const StyleParams& params, GapPolicy gap_policy) {
  for (const auto& [line_id, matches] : result.lines)
    if (!transcript.find_line(line_id)) throw Error("alignment names line " + line_id + " absent from transcript");

  HighlightSchedule schedule;
  schedule.gap_policy = gap_policy;
  auto& events = schedule.events;
  const std::string slide_id = result.slide_id.empty() ? transcript.slide_id : result.slide_id;
  for (const auto& line : transcript.lines) {
    auto it = result.lines.find(line.line_id);
    if (it == result.lines.end() || it->second.empty()) continue;
    HighlightEvent e;
    e.slide_id = slide_id;
    for (const auto& m : it->second) e.region_ids.push_back(m.region_id);
    e.t_start = line.t_start;
    e.t_end = line.t_end;
    e.style = style;
    e.params = params;
    while (!events.empty() && events.back().t_end > e.t_start) {
      events.back().t_end = e.t_start;
      if (events.back().t_end <= events.back().t_start) events.pop_back();
    }
    events.push_back(std::move(e));
  }
  if (gap_policy == GapPolicy::hold_previous)
    for (std::size_t k = 0; k + 1 < events.size(); ++k) events[k].t_end = std::max(events[k].t_end, events[k + 1].t_start);
  return schedule;
}

HighlightSchedule merge_schedules(std::span<const HighlightSchedule> parts) {
  HighlightSchedule out;
  if (!parts.empty()) out.gap_policy = parts.front().gap_policy;
  for (const auto& p : parts) out.events.insert(out.events.end(), p.events.begin(), p.events.end());
  std::stable_sort(out.events.begin(), out.events.end(), [](const HighlightEvent& a, const HighlightEvent& b) {
    if (a.t_start != b.t_start) return a.t_start < b.t_start;
    return a.slide_id < b.slide_id;
  });
  return out;
}

std::vector<Violation> validate_schedule(const HighlightSchedule& schedule, std::span<const SlideDocument> slides) {
  std::vector<Violation> out;
  std::map<std::string, const SlideDocument*> by_id;
  for (const auto& s : slides) by_id.emplace(s.slide_id, &s);
  for (std::size_t k = 0; k < schedule.events.size(); ++k) {
    const auto& e = schedule.events[k];
    const std::string who = "event " + std::to_string(k) + " (slide " + e.slide_id + ")";
    if (!(e.t_start < e.t_end)) out.push_back({who, "t_start < t_end"});
    if (e.region_ids.empty()) out.push_back({who, "region_ids non-empty"});
    if (k > 0 && schedule.events[k - 1].t_start > e.t_start) out.push_back({who, "events sorted by t_start"});
    if (!(e.params.fill_opacity >= 0 && e.params.fill_opacity <= 1)) out.push_back({who, "fill_opacity in [0,1]"});
    if (!(e.params.magnify_scale > 1)) out.push_back({who, "magnify_scale > 1"});
    auto slide = by_id.find(e.slide_id);
    if (slide == by_id.end()) {
      out.push_back({who, "slide_id references a slide"});
    } else {
      for (const auto& rid : e.region_ids)
        if (!slide->second->find_region(rid)) out.push_back({who + " / region " + rid, "region_id references a slide region"});
    }
    for (std::size_t p = 0; p < k; ++p) {
      const auto& o = schedule.events[p];
      if (o.slide_id != e.slide_id || !(o.t_start < e.t_end && e.t_start < o.t_end)) continue;
      const std::set<std::string> a(o.region_ids.begin(), o.region_ids.end());
      if (std::any_of(e.region_ids.begin(), e.region_ids.end(), [&](const std::string& r) { return a.contains(r); }))
        out.push_back({who, "overlapping events of one slide have disjoint regions"});
    }
  }
  return out;
}

std::string write_schedule(const HighlightSchedule& schedule) {
  json events = json::array();
  for (const auto& e : schedule.events) {
    events.push_back({{"slide_id", e.slide_id},
                      {"region_ids", e.region_ids},
                      {"t_start", e.t_start},
                      {"t_end", e.t_end},
                      {"style", std::string(to_string(e.style))},
                      {"params",
                       {{"stroke_color", e.params.stroke_color},
                        {"fill_color", e.params.fill_color},
                        {"fill_opacity", e.params.fill_opacity},
                        {"magnify_scale", e.params.magnify_scale}}}});
  }
  return detail::dump({{"gap_policy", std::string(to_string(schedule.gap_policy))}, {"events", std::move(events)}});
}

HighlightSchedule read_schedule(std::string_view bytes) {
  const json root = detail::parse_json(bytes);
  try {
    HighlightSchedule s;
    const auto gp = gap_policy_from_string(detail::require_string(root, "gap_policy", "schedule"));
    if (!gp) throw SchemaError("schedule.gap_policy", "must be hold_previous or clear");
    s.gap_policy = *gp;
    const json& events = detail::require_array(root, "events", "schedule");
    for (std::size_t k = 0; k < events.size(); ++k) {
      const json& je = events[k];
      const std::string ctx = "schedule.events[" + std::to_string(k) + "]";
      HighlightEvent e;
      e.slide_id = detail::require_string(je, "slide_id", ctx);
      for (const auto& r : detail::require_array(je, "region_ids", ctx)) {
        if (!r.is_string()) throw SchemaError(ctx + ".region_ids", "must be strings");
        e.region_ids.push_back(r.get<std::string>());
      }
      e.t_start = detail::require_number(je, "t_start", ctx);
      e.t_end = detail::require_number(je, "t_end", ctx);
      const auto style = highlight_style_from_string(detail::require_string(je, "style", ctx));
      if (!style) throw SchemaError(ctx + ".style", "unknown highlight style");
      e.style = *style;
      if (auto p = je.find("params"); p != je.end() && p->is_object()) {
        e.params.stroke_color = detail::optional_string(*p, "stroke_color", ctx, e.params.stroke_color);
        e.params.fill_color = detail::optional_string(*p, "fill_color", ctx, e.params.fill_color);
        if (p->contains("fill_opacity")) e.params.fill_opacity = detail::require_number(*p, "fill_opacity", ctx + ".params");
        if (p->contains("magnify_scale")) e.params.magnify_scale = detail::require_number(*p, "magnify_scale", ctx + ".params");
      }
      if (!(e.t_start < e.t_end)) throw SchemaError(ctx, "t_start < t_end");
      if (e.region_ids.empty()) throw SchemaError(ctx + ".region_ids", "must be non-empty");
      s.events.push_back(std::move(e));
    }
    return s;
  } catch (const json::exception& e) {
    throw SchemaError("schedule", std::string("unexpected JSON shape: ") + e.what());
  }
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

struct PixelRect {
  double x, y, w, h;
};

PixelRect to_pixels(const BBox& b, const ImageSize& size) {
  const double W = size.width_px;
  const double H = size.height_px;
  return {b.x * W, b.y * H, b.width * W, b.height * H};
}

std::string rect_attrs(const PixelRect& r) {
  return "x=\"" + num(r.x) + "\" y=\"" + num(r.y) + "\" width=\"" + num(r.w) + "\" height=\"" + num(r.h) + "\"";
}

/// Disjoint cover of the union of rectangles, built on the grid of all edges.
/// Emitting each cell as its own subpath keeps even-odd filling correct where
/// regions overlap.
std::vector<PixelRect> union_cells(const std::vector<PixelRect>& rects) {
  std::vector<double> xs, ys;
  for (const auto& r : rects) {
    xs.insert(xs.end(), {r.x, r.x + r.w});
    ys.insert(ys.end(), {r.y, r.y + r.h});
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  std::vector<PixelRect> cells;
  for (std::size_t yi = 0; yi + 1 < ys.size(); ++yi) {
    const double cy = (ys[yi] + ys[yi + 1]) / 2;
    std::size_t xi = 0;
    while (xi + 1 < xs.size()) {
      auto covered = [&](std::size_t k) {
        const double cx = (xs[k] + xs[k + 1]) / 2;
        return std::any_of(rects.begin(), rects.end(), [&](const PixelRect& r) {
          return cx > r.x && cx < r.x + r.w && cy > r.y && cy < r.y + r.h;
        });
      };
      if (!covered(xi)) {
        ++xi;
        continue;
      }
      std::size_t end = xi + 1;
      while (end + 1 < xs.size() && covered(end)) ++end;
      cells.push_back({xs[xi], ys[yi], xs[end] - xs[xi], ys[yi + 1] - ys[yi]});
      xi = end;
    }
  }
  return cells;
}

void require_readable(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("slide image not readable: " + path);
}

}  // namespace

std::string render_overlay(const SlideDocument& slide, const HighlightEvent& event, std::optional<std::string> image_href) {
  const ImageSize& size = slide.image_size;
  if (size.width_px <= 0 || size.height_px <= 0) throw Error("slide " + slide.slide_id + " has no image size");
  if (event.style == HighlightStyle::magnify || event.style == HighlightStyle::hide_background)
    require_readable(slide.image_path);

  std::vector<const Region*> regions;
  for (const auto& id : event.region_ids) {
    const Region* r = slide.find_region(id);
    if (!r) throw Error("event names unknown region " + id + " on slide " + slide.slide_id);
    regions.push_back(r);
  }

  const double W = size.width_px;
  const double H = size.height_px;
  const std::string href = xml_escape(image_href.value_or(slide.image_path));
  const std::string image_el = "<image x=\"0\" y=\"0\" width=\"" + num(W) + "\" height=\"" + num(H) +
                               "\" preserveAspectRatio=\"none\" xlink:href=\"" + href + "\"";
  const auto& p = event.params;
  const std::string stroke_width = num(kStrokeWidthFraction * W);

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" width=\"" << num(W)
     << "\" height=\"" << num(H) << "\" viewBox=\"0 0 " << num(W) << " " << num(H) << "\" data-slide=\""
     << xml_escape(slide.slide_id) << "\" data-style=\"" << to_string(event.style) << "\">\n";
  os << "  " << image_el << "/>\n";

  switch (event.style) {
    case HighlightStyle::bounding_box:
      for (const Region* r : regions) {
        os << "  <rect data-region=\"" << xml_escape(r->id) << "\" " << rect_attrs(to_pixels(r->bbox, size))
           << " fill=\"none\" fill-opacity=\"0\" stroke=\"" << xml_escape(p.stroke_color) << "\" stroke-width=\""
           << stroke_width << "\"/>\n";
      }
      break;
    case HighlightStyle::shading:
      for (const Region* r : regions) {
        os << "  <rect data-region=\"" << xml_escape(r->id) << "\" " << rect_attrs(to_pixels(r->bbox, size))
           << " fill=\"" << xml_escape(p.fill_color) << "\" fill-opacity=\"" << num(p.fill_opacity)
           << "\" stroke=\"none\"/>\n";
      }
      break;
    case HighlightStyle::hide_background: {
      std::vector<PixelRect> rects;
      for (const Region* r : regions) rects.push_back(to_pixels(r->bbox, size));
      std::string d = "M0 0H" + num(W) + "V" + num(H) + "H0Z";
      for (const auto& c : union_cells(rects))
        d += "M" + num(c.x) + " " + num(c.y) + "H" + num(c.x + c.w) + "V" + num(c.y + c.h) + "H" + num(c.x) + "Z";
      os << "  <path d=\"" << d << "\" fill=\"#000000\" fill-opacity=\"" << num(kHideLayerOpacity)
         << "\" fill-rule=\"evenodd\"/>\n";
      break;
    }
    case HighlightStyle::magnify: {
      os << "  <defs>\n";
      for (std::size_t k = 0; k < regions.size(); ++k)
        os << "    <clipPath id=\"clip-" << k << "\"><rect " << rect_attrs(to_pixels(regions[k]->bbox, size))
           << "/></clipPath>\n";
      os << "  </defs>\n";
      for (std::size_t k = 0; k < regions.size(); ++k) {
        const PixelRect src = to_pixels(regions[k]->bbox, size);
        // Shrink the scale if the enlarged copy would not fit the canvas, then
        // shift its center just enough to keep it on the canvas.
        const double scale = std::min({p.magnify_scale, W / src.w, H / src.h});
        const double w = src.w * scale;
        const double h = src.h * scale;
        const double cx = std::clamp(src.x + src.w / 2, w / 2, W - w / 2);
        const double cy = std::clamp(src.y + src.h / 2, h / 2, H - h / 2);
        const double tx = cx - scale * (src.x + src.w / 2);
        const double ty = cy - scale * (src.y + src.h / 2);
        os << "  <g data-region=\"" << xml_escape(regions[k]->id) << "\" transform=\"translate(" << num(tx) << " "
           << num(ty) << ") scale(" << num(scale) << ")\">\n";
        os << "    " << image_el << " clip-path=\"url(#clip-" << k << ")\"/>\n";
        os << "  </g>\n";
        os << "  <rect data-region=\"" << xml_escape(regions[k]->id) << "\" "
           << rect_attrs({cx - w / 2, cy - h / 2, w, h}) << " fill=\"none\" stroke=\"" << xml_escape(p.stroke_color)
           << "\" stroke-width=\"" << num(kStrokeWidthFraction * W / 2) << "\"/>\n";
      }
      break;
    }
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

std::string file_stem_safe(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    const auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == '-' || c == '.' || c == '_')) c = '_';
  }
  return out;
}

}  // namespace

std::string write_render_index(const std::vector<RenderedFrame>& frames) {
  json arr = json::array();
  for (const auto& f : frames)
    arr.push_back({{"file", f.file}, {"slide_id", f.slide_id}, {"t_start", f.t_start}, {"t_end", f.t_end}});
  return detail::dump({{"frames", std::move(arr)}});
}

std::vector<RenderedFrame> render_schedule(std::span<const SlideDocument> slides, const HighlightSchedule& schedule,
                                           const fs::path& out_dir, std::size_t jobs) {
  std::map<std::string, const SlideDocument*> by_id;
  for (const auto& s : slides) by_id.emplace(s.slide_id, &s);

  fs::create_directories(out_dir);
  const fs::path base = fs::absolute(out_dir).lexically_normal();

  std::vector<RenderedFrame> frames;
  std::set<std::string> used;
  for (const auto& e : schedule.events) {
    if (!by_id.contains(e.slide_id)) throw Error("schedule names unknown slide " + e.slide_id);
    const long long ms = std::llround(e.t_start * 1000.0);
    const std::string stem = file_stem_safe(e.slide_id) + "_" + std::to_string(ms) + "_" + std::string(to_string(e.style));
    std::string name = stem + ".svg";
    for (int k = 2; used.contains(name); ++k) name = stem + "-" + std::to_string(k) + ".svg";
    used.insert(name);
    frames.push_back({name, e.slide_id, e.t_start, e.t_end});
  }

  parallel_for(schedule.events.size(), jobs, [&](std::size_t k) {
    const HighlightEvent& e = schedule.events[k];
    const SlideDocument& slide = *by_id.at(e.slide_id);
    const fs::path img = fs::absolute(slide.image_path).lexically_normal();
    const std::string href = img.lexically_relative(base).generic_string();
    write_file_atomic(out_dir / frames[k].file, render_overlay(slide, e, href.empty() ? img.generic_string() : href));
  });
  write_file_atomic(out_dir / "index.json", write_render_index(frames));
  return frames;
}

}  // namespace slidesync
