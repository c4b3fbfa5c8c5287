#pragma once

// Domain types shared by every stage of the pipeline: slides and their
// layout regions, timed transcripts, alignments, ground truth and the
// threshold policies that turn similarity scores into region predictions.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slidesync {

enum class RegionKind { textual, visual };

std::string_view to_string(RegionKind kind);
std::optional<RegionKind> region_kind_from_string(std::string_view s);

/// Axis-aligned rectangle in normalized slide coordinates (0..1 on both axes).
struct BBox {
  double x = 0;
  double y = 0;
  double width = 0;
  double height = 0;

  double right() const { return x + width; }
  double bottom() const { return y + height; }
  double center_x() const { return x + width / 2; }
  double center_y() const { return y + height / 2; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Region {
  std::string id;
  RegionKind kind = RegionKind::textual;
  BBox bbox;
  std::string text;
  std::optional<double> confidence;

  friend bool operator==(const Region&, const Region&) = default;
};

struct ImageSize {
  int width_px = 0;
  int height_px = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

struct SlideDocument {
  std::string slide_id;
  std::string image_path;
  ImageSize image_size;
  std::vector<Region> regions;

  const Region* find_region(std::string_view id) const;

  friend bool operator==(const SlideDocument&, const SlideDocument&) = default;
};

struct TimedWord {
  std::string word;
  double t_start = 0;
  double t_end = 0;

  friend bool operator==(const TimedWord&, const TimedWord&) = default;
};

struct TranscriptLine {
  std::string line_id;
  std::string text;
  double t_start = 0;
  double t_end = 0;
  std::optional<std::vector<TimedWord>> words;

  friend bool operator==(const TranscriptLine&, const TranscriptLine&) = default;
};

struct Transcript {
  std::string slide_id;
  std::vector<TranscriptLine> lines;

  const TranscriptLine* find_line(std::string_view id) const;

  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct RegionMatch {
  std::string region_id;
  double score = 0;
  std::string matcher_tag;

  friend bool operator==(const RegionMatch&, const RegionMatch&) = default;
};

/// Predicted regions per transcript line. Lines with no prediction may be
/// present with an empty list or absent altogether; both mean "nothing".
struct AlignmentResult {
  std::string slide_id;
  std::string matcher;
  std::map<std::string, std::vector<RegionMatch>> lines;

  std::set<std::string> predicted(std::string_view line_id) const;

  friend bool operator==(const AlignmentResult&, const AlignmentResult&) = default;
};

struct GroundTruth {
  std::string slide_id;
  std::map<std::string, std::set<std::string>> lines;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct ThresholdPolicy {
  std::string name;
  double textual_threshold = 0;
  double visual_threshold = 0;

  double threshold_for(RegionKind kind) const {
    return kind == RegionKind::textual ? textual_threshold : visual_threshold;
  }

  friend bool operator==(const ThresholdPolicy&, const ThresholdPolicy&) = default;
};

/// Named presets: "T-1", "T-2", "T-3" and the per-method best settings
/// "best-fuzzy", "best-sbert", "best-specter", "best-scibert".
std::optional<ThresholdPolicy> threshold_preset(std::string_view name);
std::vector<std::string> threshold_preset_names();

/// Tolerance for word timestamps that fall slightly outside their line.
inline constexpr double kWordTimingSlack = 0.25;

struct Violation {
  std::string entity;  // e.g. "slide s1 / region R3"
  std::string rule;    // e.g. "bbox.x in [0,1]"

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate_slide(const SlideDocument& slide);
std::vector<Violation> validate_transcript(const Transcript& transcript);

/// Checks every type invariant and cross-reference. Transcripts and ground
/// truths are matched to slides by slide_id. An empty result means the
/// dataset is well-formed.
std::vector<Violation> validate_dataset(std::span<const SlideDocument> slides,
                                        std::span<const Transcript> transcripts,
                                        std::span<const GroundTruth> ground_truth = {});

}  // namespace slidesync
