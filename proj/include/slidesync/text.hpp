#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slidesync {

struct NormalizationOptions {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool collapse_whitespace = true;

  friend bool operator==(const NormalizationOptions&, const NormalizationOptions&) = default;
};

/// NFC, then optionally lowercase, replace punctuation and symbols (Unicode
/// P* and S*) with spaces while keeping hyphens and apostrophes that sit
/// between two letters or digits, and collapse whitespace runs to one space.
std::string normalize_text(std::string_view s, const NormalizationOptions& options = {});

/// Decodes UTF-8; ill-formed sequences become U+FFFD.
std::vector<std::uint32_t> to_codepoints(std::string_view utf8);
std::string from_codepoints(std::span<const std::uint32_t> cps);

/// Splits on ASCII and Unicode whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view s);

/// Character-level (code point) Levenshtein distance.
std::size_t char_edit_distance(std::string_view a, std::string_view b);

/// Levenshtein distance between two token sequences.
std::size_t token_edit_distance(std::span<const std::string> a, std::span<const std::string> b);

/// 1 - dist / max(|a|, |b|) in code points; 1 when both are empty.
double levenshtein_similarity(std::string_view a, std::string_view b);

}  // namespace slidesync
