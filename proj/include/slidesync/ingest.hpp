#pragma once

// Readers and writers for every interchange format, plus the dataset
// manifest that enumerates (slide, transcript, ground truth, image) tuples.
//
// Parsers never abort on bad input: malformed JSON raises ParseError with the
// byte offset, schema problems raise SchemaError naming the field and rule.
// Recoverable oddities (overlapping ASR segments, duplicated ground-truth ids)
// come back as Warning records next to the value.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slidesync/model.hpp"

namespace slidesync {

struct Warning {
  std::string entity;
  std::string message;

  friend bool operator==(const Warning&, const Warning&) = default;
};

template <class T>
struct Parsed {
  T value;
  std::vector<Warning> warnings;
};

SlideDocument parse_slide_layout(std::string_view bytes);
std::string write_slide_layout(const SlideDocument& slide);

Parsed<Transcript> parse_transcript(std::string_view bytes);
std::string write_transcript(const Transcript& transcript);

Parsed<GroundTruth> parse_ground_truth(std::string_view bytes);
std::string write_ground_truth(const GroundTruth& gt);

/// Canonical, key-sorted output; scores rounded to 6 decimal places.
std::string write_alignment(const AlignmentResult& result);
AlignmentResult read_alignment(std::string_view bytes);

struct ManifestEntry {
  std::string slide_id;
  std::filesystem::path slide;
  std::filesystem::path transcript;
  std::optional<std::filesystem::path> ground_truth;
  std::filesystem::path image;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::map<std::string, std::string> metadata;

  const ManifestEntry* find(std::string_view slide_id) const;
};

/// Relative paths are resolved against `base_dir`.
DatasetManifest parse_manifest(std::string_view bytes, const std::filesystem::path& base_dir);
/// Writes paths relative to `base_dir` when they live beneath it.
std::string write_manifest(const DatasetManifest& manifest, const std::filesystem::path& base_dir);

/// Reads and parses a manifest file; every referenced path must exist.
DatasetManifest load_manifest(const std::filesystem::path& path);

struct DatasetEntry {
  SlideDocument slide;
  Transcript transcript;
  std::optional<GroundTruth> ground_truth;
  std::vector<Warning> warnings;
};

/// Loads every entry, `jobs` at a time; results keep manifest order. The
/// slide's image_path is replaced by the manifest's resolved image path.
std::vector<DatasetEntry> load_dataset(const DatasetManifest& manifest, std::size_t jobs = 1);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace slidesync
