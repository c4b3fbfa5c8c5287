#include "slidesync/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "slidesync/kernels/kernels.hpp"

namespace slidesync {

namespace {

bool is_joiner(UChar32 c) {
  return c == U'-' || c == U'\'' || c == 0x2010 || c == 0x2011 || c == 0x2019;
}

bool is_punct_or_symbol(UChar32 c) {
  return (U_GET_GC_MASK(c) & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

void append_utf8(std::string& out, std::uint32_t cp) {
  char buf[U8_MAX_LENGTH];
  std::int32_t len = 0;
  UBool error = false;
  U8_APPEND(buf, len, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
  if (error) {
    len = 0;
    U8_APPEND_UNSAFE(buf, len, 0xFFFD);
  }
  out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

std::vector<std::uint32_t> to_codepoints(std::string_view utf8) {
  std::vector<std::uint32_t> out;
  out.reserve(utf8.size());
  const auto* s = reinterpret_cast<const std::uint8_t*>(utf8.data());
  const auto length = static_cast<std::int32_t>(utf8.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    out.push_back(c < 0 ? 0xFFFDu : static_cast<std::uint32_t>(c));
  }
  return out;
}

std::string from_codepoints(std::span<const std::uint32_t> cps) {
  std::string out;
  out.reserve(cps.size());
  for (auto cp : cps) append_utf8(out, cp);
  return out;
}

std::string normalize_text(std::string_view s, const NormalizationOptions& options) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");

  icu::UnicodeString text = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())));
  icu::UnicodeString composed = nfc->normalize(text, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
  if (options.lowercase) composed.toLower(icu::Locale::getRoot());

  std::vector<UChar32> cps;
  cps.reserve(static_cast<std::size_t>(composed.length()));
  for (std::int32_t i = 0; i < composed.length(); i = composed.moveIndex32(i, 1)) cps.push_back(composed.char32At(i));

  std::vector<std::uint32_t> kept;
  kept.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const UChar32 c = cps[i];
    if (options.strip_punctuation && is_punct_or_symbol(c)) {
      const bool intra_word = is_joiner(c) && i > 0 && i + 1 < cps.size() &&
                              u_isalnum(cps[i - 1]) && u_isalnum(cps[i + 1]);
      if (!intra_word) {
        kept.push_back(U' ');
        continue;
      }
    }
    kept.push_back(static_cast<std::uint32_t>(c));
  }

  if (options.collapse_whitespace) {
    std::vector<std::uint32_t> collapsed;
    collapsed.reserve(kept.size());
    bool pending_space = false;
    for (auto c : kept) {
      if (is_space(static_cast<UChar32>(c))) {
        pending_space = !collapsed.empty();
        continue;
      }
      if (pending_space) collapsed.push_back(U' ');
      pending_space = false;
      collapsed.push_back(c);
    }
    kept = std::move(collapsed);
  }
  return from_codepoints(kept);
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  const auto cps = to_codepoints(s);
  std::vector<std::uint32_t> current;
  for (auto c : cps) {
    if (is_space(static_cast<UChar32>(c))) {
      if (!current.empty()) out.push_back(from_codepoints(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(from_codepoints(current));
  return out;
}

std::size_t char_edit_distance(std::string_view a, std::string_view b) {
  const auto ca = to_codepoints(a);
  const auto cb = to_codepoints(b);
  return kernels::edit_distance(ca, cb);
}

std::size_t token_edit_distance(std::span<const std::string> a, std::span<const std::string> b) {
  std::unordered_map<std::string_view, std::uint32_t> ids;
  auto encode = [&ids](std::span<const std::string> tokens) {
    std::vector<std::uint32_t> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
      auto [it, inserted] = ids.try_emplace(t, static_cast<std::uint32_t>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  const auto ea = encode(a);
  const auto eb = encode(b);
  return kernels::edit_distance(ea, eb);
}

double levenshtein_similarity(std::string_view a, std::string_view b) {
  const auto ca = to_codepoints(a);
  const auto cb = to_codepoints(b);
  const std::size_t longest = std::max(ca.size(), cb.size());
  if (longest == 0) return 1.0;
  const auto dist = kernels::edit_distance(ca, cb);
  return 1.0 - static_cast<double>(dist) / static_cast<double>(longest);
}

}  // namespace slidesync
