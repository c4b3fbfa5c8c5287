#include "slidesync/correction.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "json_util.hpp"
#include "slidesync/error.hpp"
#include "slidesync/parallel.hpp"
#include "slidesync/text.hpp"

namespace slidesync {

namespace {

bool ascii_affix(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && !std::isalnum(u) && !std::isspace(u);
}

struct TokenFix {
  std::string replacement;
  std::optional<Substitution> sub;
};

/// Corrects one whitespace-free token; returns it unchanged when no unique
/// lexicon entry is close enough.
TokenFix correct_token(std::string_view raw, const Lexicon& lexicon) {
  TokenFix fix{std::string(raw), std::nullopt};
  const std::string norm = normalize_text(raw);
  if (norm.empty() || norm.find(' ') != std::string::npos || lexicon.contains(norm)) return fix;

  double best = -1;
  const std::string* best_token = nullptr;
  bool tied = false;
  for (const auto& [token, count] : lexicon) {
    const double sim = levenshtein_similarity(norm, token);
    if (sim > best) {
      best = sim;
      best_token = &token;
      tied = false;
    } else if (sim == best) {
      tied = true;
    }
  }
  if (!best_token || tied || best < kLexiconGate) return fix;

  std::size_t lead = 0;
  while (lead < raw.size() && ascii_affix(raw[lead])) ++lead;
  std::size_t trail = raw.size();
  while (trail > lead && ascii_affix(raw[trail - 1])) --trail;
  fix.replacement = std::string(raw.substr(0, lead)) + *best_token + std::string(raw.substr(trail));
  fix.sub = Substitution{norm, *best_token, best};
  return fix;
}

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view strip_quotes(std::string_view s) {
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

Lexicon build_slide_lexicon(const SlideDocument& slide) {
  Lexicon lex;
  for (const auto& r : slide.regions) {
    if (r.kind != RegionKind::textual) continue;
    for (const auto& tok : split_whitespace(normalize_text(r.text)))
      if (to_codepoints(tok).size() >= kMinLexiconTokenLength) ++lex[tok];
  }
  return lex;
}

LexicalCorrection correct_lexical(const TranscriptLine& line, const Lexicon& lexicon) {
  LexicalCorrection out{line, {}};
  const std::string& text = line.text;
  std::string rebuilt;
  rebuilt.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_ws(text[i])) {
      rebuilt.push_back(text[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !is_ws(text[j])) ++j;
    TokenFix fix = correct_token(std::string_view(text).substr(i, j - i), lexicon);
    rebuilt += fix.replacement;
    if (fix.sub) out.subs.push_back(*fix.sub);
    i = j;
  }
  out.line.text = std::move(rebuilt);
  if (out.line.words) {
    for (auto& w : *out.line.words) {
      if (w.word.empty() || std::any_of(w.word.begin(), w.word.end(), is_ws)) continue;
      w.word = correct_token(w.word, lexicon).replacement;
    }
  }
  return out;
}

TranscriptCorrection correct_transcript_lexical(const Transcript& transcript, const SlideDocument& slide) {
  const Lexicon lex = build_slide_lexicon(slide);
  TranscriptCorrection out;
  out.transcript.slide_id = transcript.slide_id;
  for (const auto& line : transcript.lines) {
    LexicalCorrection c = correct_lexical(line, lex);
    out.logs.push_back({line.line_id, std::move(c.subs)});
    out.transcript.lines.push_back(std::move(c.line));
  }
  return out;
}

std::string slide_context_text(const SlideDocument& slide) {
  std::string out;
  for (const auto& r : slide.regions) {
    if (r.kind != RegionKind::textual || r.text.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += r.text;
  }
  return out;
}

std::string render_correction_prompt(std::string_view slide_text, std::string_view line) {
  std::string p = "Slide text:\n";
  p.append(slide_text);
  p.append("\nTranscript line: \"");
  p.append(line);
  p.append("\"\nRewrite the transcript line, correcting only misrecognized words using the slide text. "
           "Reply with the corrected line only.");
  return p;
}

TranscriptCorrection correct_llm(const Transcript& transcript, const SlideDocument& slide, LlmProvider& provider,
                                 std::size_t max_in_flight) {
  const std::string context = slide_context_text(slide);
  const std::size_t n = transcript.lines.size();
  std::vector<std::optional<std::string>> replies(n);
  std::vector<std::optional<std::string>> failures(n);
  parallel_for(n, max_in_flight, [&](std::size_t i) {
    try {
      const std::string reply(strip_quotes(provider.complete(render_correction_prompt(context, transcript.lines[i].text))));
      if (reply.empty()) {
        failures[i] = "empty reply";
      } else {
        replies[i] = reply;
      }
    } catch (const UnscriptedPromptError&) {
      throw;
    } catch (const ProviderError& e) {
      failures[i] = e.what();
    }
  });

  TranscriptCorrection out;
  out.transcript = transcript;
  for (std::size_t i = 0; i < n; ++i) {
    TranscriptLine& line = out.transcript.lines[i];
    if (failures[i]) {
      out.diagnostics.push_back({transcript.slide_id, line.line_id, "", "provider_error", *failures[i]});
      continue;
    }
    if (!replies[i] || *replies[i] == line.text) continue;
    const auto before = split_whitespace(line.text);
    const auto after = split_whitespace(*replies[i]);
    line.text = *replies[i];
    if (!line.words) continue;
    if (before.size() != after.size() || line.words->size() != after.size()) {
      line.words.reset();
    } else {
      for (std::size_t k = 0; k < after.size(); ++k) (*line.words)[k].word = after[k];
    }
  }
  return out;
}

std::string write_substitution_logs(const std::vector<SubstitutionLog>& logs) {
  detail::json arr = detail::json::array();
  for (const auto& log : logs) {
    detail::json subs = detail::json::array();
    for (const auto& s : log.subs)
      subs.push_back({{"from", s.from}, {"to", s.to}, {"similarity", detail::round6(s.similarity)}});
    arr.push_back({{"line_id", log.line_id}, {"subs", std::move(subs)}});
  }
  return detail::dump(arr);
}

}  // namespace slidesync
