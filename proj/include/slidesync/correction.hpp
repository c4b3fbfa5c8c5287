#pragma once

// Slide-guided transcript correction: a deterministic lexicon backend that
// snaps near-miss tokens onto slide vocabulary, and an LLM backend that
// rewrites each line with the slide text as context.

#include <map>
#include <string>
#include <vector>

#include "slidesync/matchers.hpp"
#include "slidesync/model.hpp"
#include "slidesync/providers.hpp"

namespace slidesync {

inline constexpr double kLexiconGate = 0.75;
inline constexpr std::size_t kMinLexiconTokenLength = 3;

/// Normalized token -> occurrence count over all textual regions.
using Lexicon = std::map<std::string, int>;

Lexicon build_slide_lexicon(const SlideDocument& slide);

struct Substitution {
  std::string from;
  std::string to;
  double similarity = 0;

  friend bool operator==(const Substitution&, const Substitution&) = default;
};

struct LexicalCorrection {
  TranscriptLine line;
  std::vector<Substitution> subs;
};

/// Replaces each out-of-lexicon token with its unique nearest lexicon entry
/// when levenshtein_similarity >= 0.75. Surrounding punctuation, spacing and
/// all timestamps are kept; timed words are corrected the same way.
LexicalCorrection correct_lexical(const TranscriptLine& line, const Lexicon& lexicon);

struct SubstitutionLog {
  std::string line_id;
  std::vector<Substitution> subs;
};

struct TranscriptCorrection {
  Transcript transcript;
  std::vector<SubstitutionLog> logs;     // lexicon backend: one per line
  std::vector<Diagnostic> diagnostics;   // llm backend: failed lines
};

TranscriptCorrection correct_transcript_lexical(const Transcript& transcript, const SlideDocument& slide);

/// Text of all textual regions, one per line, in region order.
std::string slide_context_text(const SlideDocument& slide);
std::string render_correction_prompt(std::string_view slide_text, std::string_view line);

/// One provider call per line with at most `max_in_flight` outstanding. A line
/// whose call fails keeps its original text and yields a diagnostic. Word
/// timings are dropped for lines whose token count changes.
TranscriptCorrection correct_llm(const Transcript& transcript, const SlideDocument& slide, LlmProvider& provider,
                                 std::size_t max_in_flight = kDefaultMaxInFlight);

std::string write_substitution_logs(const std::vector<SubstitutionLog>& logs);

}  // namespace slidesync
