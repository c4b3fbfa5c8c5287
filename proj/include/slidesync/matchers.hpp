#pragma once

// Transcript-line to slide-region matching. Score-based methods (fuzzy
// string coverage, embedding similarity) fill a dense line x region score
// matrix that a ThresholdPolicy cuts into predictions; LLM methods make
// categorical per-line decisions and ignore thresholds.

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "slidesync/model.hpp"
#include "slidesync/providers.hpp"
#include "slidesync/text.hpp"

namespace slidesync {

enum class MatchMethod { fuzzy, embedding, llm_yes_no, llm_select };

std::string_view to_string(MatchMethod m);  // "fuzzy", "embedding", "llm-yes-no", "llm-select"
std::optional<MatchMethod> match_method_from_string(std::string_view s);

inline constexpr double kFuzzyTokenGate = 0.8;
inline constexpr std::size_t kDefaultMaxInFlight = 4;

struct MatcherConfig {
  MatchMethod method = MatchMethod::fuzzy;
  ThresholdPolicy policy;
  std::shared_ptr<EmbeddingProvider> embedding_provider;
  std::shared_ptr<LlmProvider> llm_provider;
  NormalizationOptions normalization;
  std::size_t max_in_flight = kDefaultMaxInFlight;
};

/// Throws std::invalid_argument when a method lacks its provider.
void check_config(const MatcherConfig& config);

struct ScoreMatrix {
  std::vector<std::string> line_ids;
  std::vector<std::string> region_ids;
  std::vector<double> scores;  // row-major, one row per line

  double at(std::size_t line, std::size_t region) const { return scores[line * region_ids.size() + region]; }
  double& at(std::size_t line, std::size_t region) { return scores[line * region_ids.size() + region]; }
};

struct Diagnostic {
  std::string slide_id;
  std::string line_id;
  std::string region_id;  // empty when the problem concerns the whole line
  std::string kind;       // e.g. "provider_error", "reply_unrecognized", "dropped_id"
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Token coverage of the line by the region: the fraction of line tokens
/// that have some region token with levenshtein_similarity >= 0.8. Inputs
/// are expected to be normalized already. 0 when either side has no tokens.
double fuzzy_score(std::string_view line_text, std::string_view region_text);

/// (cosine + 1) / 2, clamped to [0,1]; 0 when either vector is all zeros.
double similarity_from_embeddings(const Embedding& a, const Embedding& b);

/// Embeds both (normalized) texts and scores them; empty region text is 0.
double embedding_score(std::string_view line_text, std::string_view region_text, EmbeddingProvider& provider);

std::string render_yes_no_prompt(std::string_view line, std::string_view region_text);
std::string render_select_prompt(std::string_view line, const std::vector<const Region*>& regions);

enum class YesNo { yes, no, unrecognized };

/// First alphabetic token of the reply, case-insensitive.
YesNo parse_yes_no(std::string_view reply);

struct YesNoDecision {
  bool relevant = false;
  std::optional<Diagnostic> diagnostic;
};
YesNoDecision llm_yes_no_decide(std::string_view line_text, const Region& region, LlmProvider& provider);

struct SelectDecision {
  std::set<std::string> region_ids;
  std::vector<Diagnostic> diagnostics;
};

/// Parses a comma/newline separated id list. Unknown ids are dropped with a
/// "dropped_id" diagnostic; prose that is not an id list yields nothing and a
/// "reply_unparseable" diagnostic. Empty or "none" means no regions.
SelectDecision parse_select_reply(std::string_view reply, const std::vector<const Region*>& regions);
SelectDecision llm_select(std::string_view line_text, const std::vector<const Region*>& regions, LlmProvider& provider);

/// Dense score matrix for the score-based methods.
struct ScoredSlide {
  ScoreMatrix matrix;
  std::vector<std::uint8_t> line_ok;  // 0 where scoring the line failed
  std::vector<Diagnostic> diagnostics;
};
ScoredSlide score_slide(const SlideDocument& slide, const Transcript& transcript, const MatcherConfig& config);

/// Applies per-kind thresholds. Lines whose normalized text is empty or whose
/// scoring failed receive no predictions.
AlignmentResult apply_policy(const ScoreMatrix& matrix, const SlideDocument& slide, const ThresholdPolicy& policy,
                             std::string_view matcher_tag, const std::vector<std::uint8_t>& line_ok);

struct AlignOutput {
  AlignmentResult result;
  std::vector<Diagnostic> diagnostics;
};

AlignOutput align(const SlideDocument& slide, const Transcript& transcript, const MatcherConfig& config);

/// JSON array of {"slide_id", "line_id", "region_id", "kind", "message"}.
std::string write_diagnostics(const std::vector<Diagnostic>& diagnostics);

/// Tag recorded on each match, e.g. "fuzzy" or "embedding:hashing-char3-d256".
std::string matcher_tag(const MatcherConfig& config);

}  // namespace slidesync
