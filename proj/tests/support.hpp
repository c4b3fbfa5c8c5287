#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "slidesync/ingest.hpp"
#include "slidesync/model.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return SLIDESYNC_SOURCE_DIR; }
inline std::filesystem::path sample_dir() { return source_dir() / "data" / "sample"; }

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 seed{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() / ("slidesync-test-" + std::to_string(seed()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  double real(double lo = 0, double hi = 1) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  bool coin(double p = 0.5) { return real() < p; }

  std::string word(int min_len = 1, int max_len = 8, std::string_view alphabet = "abcdefghij") {
    std::string w;
    const int n = integer(min_len, max_len);
    for (int i = 0; i < n; ++i) w.push_back(alphabet[static_cast<std::size_t>(integer(0, int(alphabet.size()) - 1))]);
    return w;
  }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(integer(0, int(v.size()) - 1))];
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline slidesync::Region textual(std::string id, slidesync::BBox box, std::string text) {
  return {std::move(id), slidesync::RegionKind::textual, box, std::move(text), std::nullopt};
}

inline slidesync::Region visual(std::string id, slidesync::BBox box, std::string text = "") {
  return {std::move(id), slidesync::RegionKind::visual, box, std::move(text), std::nullopt};
}

inline slidesync::TranscriptLine line(std::string id, double t0, double t1, std::string text) {
  return {std::move(id), std::move(text), t0, t1, std::nullopt};
}

}  // namespace testing
