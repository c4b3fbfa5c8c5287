#include "slidesync/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "slidesync/error.hpp"
#include "slidesync/parallel.hpp"

namespace slidesync {

namespace fs = std::filesystem;
using detail::json;

namespace {

template <class Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    throw SchemaError("document", std::string("unexpected JSON shape: ") + e.what());
  }
}

int require_positive_int(const json& v, const std::string& field) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw SchemaError(field, "must be an integer");
  const auto i = v.get<long long>();
  if (i <= 0 || i > 1'000'000) throw SchemaError(field, "must be a positive integer");
  return static_cast<int>(i);
}

void raise_first(const std::vector<Violation>& violations) {
  if (!violations.empty()) throw SchemaError(violations.front().entity, violations.front().rule);
}

}  // namespace

SlideDocument parse_slide_layout(std::string_view bytes) {
  const json root = detail::parse_json(bytes);
  return guarded([&] {
    SlideDocument slide;
    slide.slide_id = detail::require_string(root, "slide_id", "slide");
    slide.image_path = detail::optional_string(root, "image_path", "slide");
    const json& size = detail::require(root, "image_size", "slide");
    if (!size.is_array() || size.size() != 2) throw SchemaError("slide.image_size", "must be [width, height]");
    slide.image_size.width_px = require_positive_int(size[0], "slide.image_size[0]");
    slide.image_size.height_px = require_positive_int(size[1], "slide.image_size[1]");

    const json& regions = detail::require_array(root, "regions", "slide");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const json& r = regions[i];
      std::string ctx = "slide.regions[" + std::to_string(i) + "]";
      Region region;
      region.id = detail::require_string(r, "id", ctx);
      ctx = "region " + region.id;
      const auto kind = region_kind_from_string(detail::require_string(r, "kind", ctx));
      if (!kind) throw SchemaError(ctx + ".kind", "must be \"textual\" or \"visual\"");
      region.kind = *kind;
      const json& bbox = detail::require(r, "bbox", ctx);
      if (!bbox.is_array() || bbox.size() != 4) throw SchemaError(ctx + ".bbox", "must be [x, y, width, height]");
      region.bbox = {detail::as_number(bbox[0], ctx + ".bbox[0]"), detail::as_number(bbox[1], ctx + ".bbox[1]"),
                     detail::as_number(bbox[2], ctx + ".bbox[2]"), detail::as_number(bbox[3], ctx + ".bbox[3]")};
      if (region.kind == RegionKind::textual) {
        if (!r.contains("text")) throw SchemaError(ctx + ".text", "required for textual regions");
        region.text = detail::require_string(r, "text", ctx);
      } else {
        region.text = detail::optional_string(r, "text", ctx);
      }
      if (auto c = r.find("confidence"); c != r.end() && !c->is_null())
        region.confidence = detail::as_number(*c, ctx + ".confidence");
      slide.regions.push_back(std::move(region));
    }
    raise_first(validate_slide(slide));
    return slide;
  });
}

std::string write_slide_layout(const SlideDocument& slide) {
  json regions = json::array();
  for (const auto& r : slide.regions) {
    json jr = {{"id", r.id},
               {"kind", std::string(to_string(r.kind))},
               {"bbox", {r.bbox.x, r.bbox.y, r.bbox.width, r.bbox.height}},
               {"text", r.text}};
    if (r.confidence) jr["confidence"] = *r.confidence;
    regions.push_back(std::move(jr));
  }
  json root = {{"slide_id", slide.slide_id},
               {"image_path", slide.image_path},
               {"image_size", {slide.image_size.width_px, slide.image_size.height_px}},
               {"regions", std::move(regions)}};
  return detail::dump(root);
}

Parsed<Transcript> parse_transcript(std::string_view bytes) {
  const json root = detail::parse_json(bytes);
  return guarded([&] {
    Parsed<Transcript> out;
    Transcript& t = out.value;
    t.slide_id = detail::require_string(root, "slide_id", "transcript");
    const json& lines = detail::require_array(root, "lines", "transcript");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const json& l = lines[i];
      std::string ctx = "transcript.lines[" + std::to_string(i) + "]";
      TranscriptLine line;
      line.line_id = detail::require_string(l, "line_id", ctx);
      ctx = "line " + line.line_id;
      line.text = detail::require_string(l, "text", ctx);
      line.t_start = detail::require_number(l, "t_start", ctx);
      line.t_end = detail::require_number(l, "t_end", ctx);
      if (!(line.t_end > line.t_start)) throw SchemaError(ctx + ".t_end", "must be greater than t_start");
      if (auto w = l.find("words"); w != l.end() && !w->is_null()) {
        if (!w->is_array()) throw SchemaError(ctx + ".words", "must be an array");
        std::vector<TimedWord> words;
        for (std::size_t k = 0; k < w->size(); ++k) {
          const json& jw = (*w)[k];
          const std::string wctx = ctx + ".words[" + std::to_string(k) + "]";
          words.push_back({detail::require_string(jw, "w", wctx), detail::require_number(jw, "s", wctx),
                           detail::require_number(jw, "e", wctx)});
        }
        line.words = std::move(words);
      }
      t.lines.push_back(std::move(line));
    }
    std::stable_sort(t.lines.begin(), t.lines.end(),
                     [](const TranscriptLine& a, const TranscriptLine& b) { return a.t_start < b.t_start; });
    raise_first(validate_transcript(t));
    for (std::size_t i = 1; i < t.lines.size(); ++i) {
      if (t.lines[i].t_start < t.lines[i - 1].t_end)
        out.warnings.push_back({"line " + t.lines[i].line_id, "interval overlaps previous line " + t.lines[i - 1].line_id});
    }
    return out;
  });
}

std::string write_transcript(const Transcript& transcript) {
  json lines = json::array();
  for (const auto& l : transcript.lines) {
    json jl = {{"line_id", l.line_id}, {"text", l.text}, {"t_start", l.t_start}, {"t_end", l.t_end}};
    if (l.words) {
      json words = json::array();
      for (const auto& w : *l.words) words.push_back({{"w", w.word}, {"s", w.t_start}, {"e", w.t_end}});
      jl["words"] = std::move(words);
    }
    lines.push_back(std::move(jl));
  }
  return detail::dump({{"slide_id", transcript.slide_id}, {"lines", std::move(lines)}});
}

Parsed<GroundTruth> parse_ground_truth(std::string_view bytes) {
  const json root = detail::parse_json(bytes);
  return guarded([&] {
    Parsed<GroundTruth> out;
    out.value.slide_id = detail::optional_string(root, "slide_id", "ground_truth");
    const json& lines = detail::require(root, "lines", "ground_truth");
    if (!lines.is_object()) throw SchemaError("ground_truth.lines", "must be an object");
    for (const auto& [line_id, ids] : lines.items()) {
      const std::string ctx = "line " + line_id;
      if (!ids.is_array()) throw SchemaError(ctx, "must be an array of region ids");
      auto& set = out.value.lines[line_id];
      for (const auto& id : ids) {
        if (!id.is_string()) throw SchemaError(ctx, "region ids must be strings");
        if (!set.insert(id.get<std::string>()).second)
          out.warnings.push_back({ctx, "duplicate region id " + id.get<std::string>() + " removed"});
      }
    }
    return out;
  });
}

std::string write_ground_truth(const GroundTruth& gt) {
  json lines = json::object();
  for (const auto& [line_id, ids] : gt.lines) lines[line_id] = json(std::vector<std::string>(ids.begin(), ids.end()));
  return detail::dump({{"slide_id", gt.slide_id}, {"lines", std::move(lines)}});
}

std::string write_alignment(const AlignmentResult& result) {
  json lines = json::object();
  for (const auto& [line_id, matches] : result.lines) {
    json arr = json::array();
    for (const auto& m : matches) arr.push_back({{"region_id", m.region_id}, {"score", detail::round6(m.score)}});
    lines[line_id] = std::move(arr);
  }
  return detail::dump({{"slide_id", result.slide_id}, {"matcher", result.matcher}, {"lines", std::move(lines)}});
}

AlignmentResult read_alignment(std::string_view bytes) {
  const json root = detail::parse_json(bytes);
  return guarded([&] {
    AlignmentResult out;
    out.slide_id = detail::optional_string(root, "slide_id", "alignment");
    out.matcher = detail::optional_string(root, "matcher", "alignment");
    const json& lines = detail::require(root, "lines", "alignment");
    if (!lines.is_object()) throw SchemaError("alignment.lines", "must be an object");
    for (const auto& [line_id, arr] : lines.items()) {
      const std::string ctx = "line " + line_id;
      if (!arr.is_array()) throw SchemaError(ctx, "must be an array");
      auto& matches = out.lines[line_id];
      std::set<std::string> seen;
      for (const auto& m : arr) {
        RegionMatch rm;
        rm.region_id = detail::require_string(m, "region_id", ctx);
        rm.score = detail::require_number(m, "score", ctx);
        rm.matcher_tag = out.matcher;
        if (rm.score < 0 || rm.score > 1) throw SchemaError(ctx + " / region " + rm.region_id, "score in [0,1]");
        if (!seen.insert(rm.region_id).second)
          throw SchemaError(ctx + " / region " + rm.region_id, "no duplicate region_id per line");
        matches.push_back(std::move(rm));
      }
    }
    return out;
  });
}

const ManifestEntry* DatasetManifest::find(std::string_view slide_id) const {
  for (const auto& e : entries)
    if (e.slide_id == slide_id) return &e;
  return nullptr;
}

DatasetManifest parse_manifest(std::string_view bytes, const fs::path& base_dir) {
  const json root = detail::parse_json(bytes);
  return guarded([&] {
    DatasetManifest m;
    auto resolve = [&](const std::string& p) {
      fs::path path(p);
      return path.is_absolute() ? path : (base_dir / path).lexically_normal();
    };
    const json& entries = detail::require_array(root, "entries", "manifest");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const json& e = entries[i];
      const std::string ctx = "manifest.entries[" + std::to_string(i) + "]";
      ManifestEntry entry;
      entry.slide_id = detail::require_string(e, "slide_id", ctx);
      if (!seen.insert(entry.slide_id).second) throw SchemaError(ctx + ".slide_id", "slide_ids must be distinct");
      entry.slide = resolve(detail::require_string(e, "slide", ctx));
      entry.transcript = resolve(detail::require_string(e, "transcript", ctx));
      const std::string gt = detail::optional_string(e, "ground_truth", ctx);
      if (!gt.empty()) entry.ground_truth = resolve(gt);
      entry.image = resolve(detail::require_string(e, "image", ctx));
      m.entries.push_back(std::move(entry));
    }
    if (auto md = root.find("metadata"); md != root.end() && !md->is_null()) {
      if (!md->is_object()) throw SchemaError("manifest.metadata", "must be an object");
      for (const auto& [k, v] : md->items()) m.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return m;
  });
}

std::string write_manifest(const DatasetManifest& manifest, const fs::path& base_dir) {
  const fs::path base = fs::absolute(base_dir).lexically_normal();
  auto rel = [&](const fs::path& p) {
    const fs::path abs = fs::absolute(p).lexically_normal();
    const fs::path r = abs.lexically_relative(base);
    return (r.empty() ? abs : r).generic_string();
  };
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    json je = {{"slide_id", e.slide_id}, {"slide", rel(e.slide)}, {"transcript", rel(e.transcript)}, {"image", rel(e.image)}};
    if (e.ground_truth) je["ground_truth"] = rel(*e.ground_truth);
    entries.push_back(std::move(je));
  }
  json metadata = json::object();
  for (const auto& [k, v] : manifest.metadata) metadata[k] = v;
  return detail::dump({{"entries", std::move(entries)}, {"metadata", std::move(metadata)}});
}

DatasetManifest load_manifest(const fs::path& path) {
  DatasetManifest m = parse_manifest(read_file(path), path.parent_path());
  for (const auto& e : m.entries) {
    for (const fs::path* p : {&e.slide, &e.transcript, &e.image})
      if (!fs::exists(*p)) throw IoError("manifest entry " + e.slide_id + ": missing file " + p->string());
    if (e.ground_truth && !fs::exists(*e.ground_truth))
      throw IoError("manifest entry " + e.slide_id + ": missing file " + e.ground_truth->string());
  }
  return m;
}

std::vector<DatasetEntry> load_dataset(const DatasetManifest& manifest, std::size_t jobs) {
  std::vector<DatasetEntry> out(manifest.entries.size());
  parallel_for(manifest.entries.size(), jobs, [&](std::size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    DatasetEntry& d = out[i];
    try {
      d.slide = parse_slide_layout(read_file(e.slide));
      d.slide.image_path = e.image.string();
      auto tr = parse_transcript(read_file(e.transcript));
      d.transcript = std::move(tr.value);
      d.warnings = std::move(tr.warnings);
      if (e.ground_truth) {
        auto gt = parse_ground_truth(read_file(*e.ground_truth));
        if (gt.value.slide_id.empty()) gt.value.slide_id = e.slide_id;
        d.ground_truth = std::move(gt.value);
        d.warnings.insert(d.warnings.end(), gt.warnings.begin(), gt.warnings.end());
      }
    } catch (const SchemaError& err) {
      throw SchemaError("slide " + e.slide_id + " / " + err.field(), err.rule());
    } catch (const ParseError& err) {
      throw ParseError("slide " + e.slide_id + ": " + err.what(), err.offset());
    }
    if (d.slide.slide_id != e.slide_id)
      throw SchemaError("slide " + e.slide_id, "slide layout slide_id matches manifest entry");
    if (d.transcript.slide_id != e.slide_id)
      throw SchemaError("slide " + e.slide_id, "transcript slide_id matches manifest entry");
    if (d.ground_truth && d.ground_truth->slide_id != e.slide_id)
      throw SchemaError("slide " + e.slide_id, "ground truth slide_id matches manifest entry");
  });
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  thread_local std::mt19937_64 rng{std::random_device{}()};
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("rename failed for " + path.string() + ": " + ec.message());
  }
}

}  // namespace slidesync
