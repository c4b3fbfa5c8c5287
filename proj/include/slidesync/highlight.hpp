#pragma once

// Timed highlight schedules and their SVG overlays. Each overlay is a
// standalone SVG whose viewBox is the slide's pixel size, drawn over a
// reference to the slide raster.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slidesync/model.hpp"

namespace slidesync {

enum class HighlightStyle { bounding_box, shading, hide_background, magnify };
enum class GapPolicy { hold_previous, clear };

std::string_view to_string(HighlightStyle s);
/// Accepts snake_case names and their hyphenated spellings.
std::optional<HighlightStyle> highlight_style_from_string(std::string_view s);
std::string_view to_string(GapPolicy g);
std::optional<GapPolicy> gap_policy_from_string(std::string_view s);

inline constexpr double kDefaultFillOpacity = 0.35;
inline constexpr double kDefaultMagnifyScale = 1.6;
inline constexpr double kHideLayerOpacity = 0.85;
inline constexpr double kStrokeWidthFraction = 0.004;  // of image width

struct StyleParams {
  std::string stroke_color = "#ff3b30";
  std::string fill_color = "#ffd60a";
  double fill_opacity = kDefaultFillOpacity;
  double magnify_scale = kDefaultMagnifyScale;

  friend bool operator==(const StyleParams&, const StyleParams&) = default;
};

struct HighlightEvent {
  std::string slide_id;
  std::vector<std::string> region_ids;
  double t_start = 0;
  double t_end = 0;
  HighlightStyle style = HighlightStyle::bounding_box;
  StyleParams params;

  friend bool operator==(const HighlightEvent&, const HighlightEvent&) = default;
};

struct HighlightSchedule {
  GapPolicy gap_policy = GapPolicy::clear;
  std::vector<HighlightEvent> events;

  friend bool operator==(const HighlightSchedule&, const HighlightSchedule&) = default;
};

/// One event per transcript line with predictions. If ASR segments overlap,
/// the earlier event is cut at the later one's start (and dropped if nothing
/// is left). Under hold_previous each event then extends to the next start.
/// Throws Error if the result names a line absent from the transcript.
HighlightSchedule build_schedule(const AlignmentResult& result, const Transcript& transcript, HighlightStyle style,
                                 const StyleParams& params, GapPolicy gap_policy);

/// Concatenates per-slide schedules, ordered by (t_start, slide_id).
HighlightSchedule merge_schedules(std::span<const HighlightSchedule> parts);

std::vector<Violation> validate_schedule(const HighlightSchedule& schedule, std::span<const SlideDocument> slides);

std::string write_schedule(const HighlightSchedule& schedule);
HighlightSchedule read_schedule(std::string_view bytes);

/// `image_href` overrides the raster reference written into the SVG; by
/// default slide.image_path is used. Magnify and hide_background need the
/// raster and throw IoError when it cannot be read.
std::string render_overlay(const SlideDocument& slide, const HighlightEvent& event,
                           std::optional<std::string> image_href = std::nullopt);

struct RenderedFrame {
  std::string file;
  std::string slide_id;
  double t_start = 0;
  double t_end = 0;
};

/// Writes {slide_id}_{t_start_ms}_{style}.svg per event and index.json into
/// out_dir. Image references are relative to out_dir.
std::vector<RenderedFrame> render_schedule(std::span<const SlideDocument> slides, const HighlightSchedule& schedule,
                                           const std::filesystem::path& out_dir, std::size_t jobs = 1);

std::string write_render_index(const std::vector<RenderedFrame>& frames);

}  // namespace slidesync
