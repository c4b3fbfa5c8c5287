#include "slidesync/matchers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "json_util.hpp"
#include "slidesync/error.hpp"
#include "slidesync/kernels/kernels.hpp"
#include "slidesync/parallel.hpp"

namespace slidesync {

namespace {

std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool has_text(const Region& r) { return !trim(r.text).empty(); }

}  // namespace

std::string_view to_string(MatchMethod m) {
  switch (m) {
    case MatchMethod::fuzzy: return "fuzzy";
    case MatchMethod::embedding: return "embedding";
    case MatchMethod::llm_yes_no: return "llm-yes-no";
    case MatchMethod::llm_select: return "llm-select";
  }
  return "unknown";
}

std::optional<MatchMethod> match_method_from_string(std::string_view s) {
  for (auto m : {MatchMethod::fuzzy, MatchMethod::embedding, MatchMethod::llm_yes_no, MatchMethod::llm_select})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

void check_config(const MatcherConfig& config) {
  if (config.method == MatchMethod::embedding && !config.embedding_provider)
    throw std::invalid_argument("embedding matcher requires an embedding provider");
  if ((config.method == MatchMethod::llm_yes_no || config.method == MatchMethod::llm_select) && !config.llm_provider)
    throw std::invalid_argument("LLM matcher requires an LLM provider");
  const auto& p = config.policy;
  if (!(p.textual_threshold >= 0 && p.textual_threshold <= 1 && p.visual_threshold >= 0 && p.visual_threshold <= 1))
    throw std::invalid_argument("thresholds must lie in [0,1]");
}

std::string matcher_tag(const MatcherConfig& config) {
  std::string tag(to_string(config.method));
  if (config.method == MatchMethod::embedding && config.embedding_provider)
    tag += ":" + config.embedding_provider->model_tag();
  if ((config.method == MatchMethod::llm_yes_no || config.method == MatchMethod::llm_select) && config.llm_provider)
    tag += ":" + config.llm_provider->model_tag();
  return tag;
}

std::string write_diagnostics(const std::vector<Diagnostic>& diagnostics) {
  detail::json arr = detail::json::array();
  for (const auto& d : diagnostics)
    arr.push_back({{"slide_id", d.slide_id},
                   {"line_id", d.line_id},
                   {"region_id", d.region_id},
                   {"kind", d.kind},
                   {"message", d.message}});
  return detail::dump(arr);
}

double fuzzy_score(std::string_view line_text, std::string_view region_text) {
  const auto line_tokens = split_spaces(line_text);
  const auto region_tokens = split_spaces(region_text);
  if (line_tokens.empty() || region_tokens.empty()) return 0.0;

  std::unordered_set<std::string_view> exact(region_tokens.begin(), region_tokens.end());
  std::vector<std::vector<std::uint32_t>> region_cps;
  region_cps.reserve(exact.size());
  for (auto t : exact) region_cps.push_back(to_codepoints(t));

  std::size_t hits = 0;
  for (auto token : line_tokens) {
    if (exact.contains(token)) {
      ++hits;
      continue;
    }
    const auto cps = to_codepoints(token);
    for (const auto& r : region_cps) {
      const std::size_t longest = std::max(cps.size(), r.size());
      const std::size_t shortest = std::min(cps.size(), r.size());
      // The length gap alone is a lower bound on the distance.
      if (1.0 - static_cast<double>(longest - shortest) / static_cast<double>(longest) < kFuzzyTokenGate) continue;
      const double sim = 1.0 - static_cast<double>(kernels::edit_distance(cps, r)) / static_cast<double>(longest);
      if (sim >= kFuzzyTokenGate) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(line_tokens.size());
}

double similarity_from_embeddings(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) throw ProviderError("embedding dimension mismatch");
  const double na = kernels::dot(a, a);
  const double nb = kernels::dot(b, b);
  if (na == 0 || nb == 0) return 0.0;
  const double cosine = kernels::dot(a, b) / std::sqrt(na * nb);
  return std::clamp((cosine + 1.0) / 2.0, 0.0, 1.0);
}

double embedding_score(std::string_view line_text, std::string_view region_text, EmbeddingProvider& provider) {
  if (region_text.empty() || line_text.empty()) return 0.0;
  const std::vector<std::string> texts{std::string(line_text), std::string(region_text)};
  const auto vectors = provider.embed(texts);
  if (vectors.size() != 2) throw ProviderError("provider returned wrong number of vectors");
  return similarity_from_embeddings(vectors[0], vectors[1]);
}

std::string render_yes_no_prompt(std::string_view line, std::string_view region_text) {
  std::string p = "Transcript: \"";
  p.append(line);
  p.append("\"\nSlide region: \"");
  p.append(region_text);
  p.append("\"\nIs the slide region relevant to the transcript? Answer Yes or No.");
  return p;
}

std::string render_select_prompt(std::string_view line, const std::vector<const Region*>& regions) {
  std::string p = "Transcript: \"";
  p.append(line);
  p.append("\"\nSlide regions:\n");
  for (const Region* r : regions) {
    p.append("[").append(r->id).append("] ").append(r->text).append("\n");
  }
  p.append("List the ids of all relevant regions, comma-separated, or \"none\".");
  return p;
}

YesNo parse_yes_no(std::string_view reply) {
  reply = trim(reply);
  std::size_t n = 0;
  while (n < reply.size() && std::isalpha(static_cast<unsigned char>(reply[n]))) ++n;
  const std::string word = lower_ascii(reply.substr(0, n));
  if (word == "yes") return YesNo::yes;
  if (word == "no") return YesNo::no;
  return YesNo::unrecognized;
}

YesNoDecision llm_yes_no_decide(std::string_view line_text, const Region& region, LlmProvider& provider) {
  const std::string reply = provider.complete(render_yes_no_prompt(line_text, region.text));
  switch (parse_yes_no(reply)) {
    case YesNo::yes: return {true, std::nullopt};
    case YesNo::no: return {false, std::nullopt};
    case YesNo::unrecognized: break;
  }
  Diagnostic d;
  d.region_id = region.id;
  d.kind = "reply_unrecognized";
  d.message = "expected Yes or No, got \"" + std::string(trim(reply).substr(0, 80)) + "\"";
  return {false, d};
}

SelectDecision parse_select_reply(std::string_view reply, const std::vector<const Region*>& regions) {
  SelectDecision out;
  reply = trim(reply);
  std::string bare = lower_ascii(reply);
  while (!bare.empty() && (bare.back() == '.' || bare.back() == '!')) bare.pop_back();
  if (bare.empty() || bare == "none") return out;

  std::vector<std::string_view> pieces;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= reply.size(); ++i) {
    if (i == reply.size() || reply[i] == ',' || reply[i] == '\n') {
      pieces.push_back(reply.substr(start, i - start));
      start = i + 1;
    }
  }
  std::set<std::string> chosen;
  std::vector<Diagnostic> dropped;
  for (auto piece : pieces) {
    piece = trim(piece);
    while (!piece.empty() && std::string_view("[(\"'`").find(piece.front()) != std::string_view::npos) piece.remove_prefix(1);
    while (!piece.empty() && std::string_view("])\"'`.").find(piece.back()) != std::string_view::npos) piece.remove_suffix(1);
    piece = trim(piece);
    if (piece.empty()) continue;
    if (std::any_of(piece.begin(), piece.end(), [](unsigned char c) { return std::isspace(c) != 0; })) {
      Diagnostic d;
      d.kind = "reply_unparseable";
      d.message = "reply is not an id list: \"" + std::string(reply.substr(0, 80)) + "\"";
      out.diagnostics.push_back(std::move(d));
      return out;
    }
    const bool known = std::any_of(regions.begin(), regions.end(), [&](const Region* r) { return r->id == piece; });
    if (known) {
      chosen.insert(std::string(piece));
    } else {
      Diagnostic d;
      d.region_id = std::string(piece);
      d.kind = "dropped_id";
      d.message = "reply names unknown region " + std::string(piece);
      dropped.push_back(std::move(d));
    }
  }
  out.region_ids = std::move(chosen);
  out.diagnostics = std::move(dropped);
  return out;
}

SelectDecision llm_select(std::string_view line_text, const std::vector<const Region*>& regions, LlmProvider& provider) {
  if (regions.empty()) return {};
  return parse_select_reply(provider.complete(render_select_prompt(line_text, regions)), regions);
}

ScoredSlide score_slide(const SlideDocument& slide, const Transcript& transcript, const MatcherConfig& config) {
  check_config(config);
  ScoredSlide out;
  ScoreMatrix& m = out.matrix;
  const std::size_t n_lines = transcript.lines.size();
  const std::size_t n_regions = slide.regions.size();
  for (const auto& l : transcript.lines) m.line_ids.push_back(l.line_id);
  for (const auto& r : slide.regions) m.region_ids.push_back(r.id);
  m.scores.assign(n_lines * n_regions, 0.0);
  out.line_ok.assign(n_lines, 1);

  std::vector<std::string> line_text(n_lines);
  std::vector<std::string> region_text(n_regions);
  for (std::size_t i = 0; i < n_lines; ++i) {
    line_text[i] = normalize_text(transcript.lines[i].text, config.normalization);
    if (line_text[i].empty()) out.line_ok[i] = 0;
  }
  for (std::size_t j = 0; j < n_regions; ++j) region_text[j] = normalize_text(slide.regions[j].text, config.normalization);

  if (config.method == MatchMethod::fuzzy) {
    for (std::size_t i = 0; i < n_lines; ++i)
      for (std::size_t j = 0; j < n_regions; ++j) m.at(i, j) = fuzzy_score(line_text[i], region_text[j]);
    return out;
  }
  if (config.method != MatchMethod::embedding) throw std::invalid_argument("score_slide: method is not score-based");

  auto fail_line = [&](std::size_t i, const std::string& what) {
    out.line_ok[i] = 0;
    out.diagnostics.push_back({slide.slide_id, transcript.lines[i].line_id, "", "provider_error", what});
  };

  EmbeddingProvider& provider = *config.embedding_provider;
  std::vector<Embedding> region_vec;
  try {
    region_vec = provider.embed(region_text);
    if (region_vec.size() != n_regions) throw ProviderError("provider returned wrong number of vectors");
  } catch (const ProviderError& e) {
    for (std::size_t i = 0; i < n_lines; ++i) fail_line(i, std::string("region embedding failed: ") + e.what());
    return out;
  }

  std::vector<std::optional<std::string>> errors(n_lines);
  parallel_for(n_lines, config.max_in_flight, [&](std::size_t i) {
    if (!out.line_ok[i]) return;
    try {
      const std::vector<std::string> one{line_text[i]};
      const auto lv = provider.embed(one);
      if (lv.size() != 1) throw ProviderError("provider returned wrong number of vectors");
      for (std::size_t j = 0; j < n_regions; ++j)
        m.at(i, j) = region_text[j].empty() ? 0.0 : similarity_from_embeddings(lv[0], region_vec[j]);
    } catch (const ProviderError& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n_lines; ++i)
    if (errors[i]) fail_line(i, *errors[i]);
  return out;
}

AlignmentResult apply_policy(const ScoreMatrix& matrix, const SlideDocument& slide, const ThresholdPolicy& policy,
                             std::string_view tag, const std::vector<std::uint8_t>& line_ok) {
  AlignmentResult result;
  result.slide_id = slide.slide_id;
  result.matcher = std::string(tag);
  const std::size_t n_regions = matrix.region_ids.size();
  std::vector<double> thresholds(n_regions);
  for (std::size_t j = 0; j < n_regions; ++j) {
    const Region* r = slide.find_region(matrix.region_ids[j]);
    if (!r) throw std::invalid_argument("score matrix names unknown region " + matrix.region_ids[j]);
    thresholds[j] = policy.threshold_for(r->kind);
  }
  std::vector<std::uint8_t> mask(n_regions);
  for (std::size_t i = 0; i < matrix.line_ids.size(); ++i) {
    auto& matches = result.lines[matrix.line_ids[i]];
    if (i < line_ok.size() && !line_ok[i]) continue;
    const std::span<const double> row(matrix.scores.data() + i * n_regions, n_regions);
    kernels::threshold_mask(row, thresholds, mask);
    for (std::size_t j = 0; j < n_regions; ++j)
      if (mask[j]) matches.push_back({matrix.region_ids[j], row[j], std::string(tag)});
  }
  return result;
}

AlignOutput align(const SlideDocument& slide, const Transcript& transcript, const MatcherConfig& config) {
  check_config(config);
  AlignOutput out;
  const std::string tag = matcher_tag(config);

  if (config.method == MatchMethod::fuzzy || config.method == MatchMethod::embedding) {
    ScoredSlide scored = score_slide(slide, transcript, config);
    out.result = apply_policy(scored.matrix, slide, config.policy, tag, scored.line_ok);
    out.diagnostics = std::move(scored.diagnostics);
    return out;
  }

  out.result.slide_id = slide.slide_id;
  out.result.matcher = tag;
  LlmProvider& provider = *config.llm_provider;

  std::vector<const Region*> offered;
  for (const auto& r : slide.regions)
    if (has_text(r)) offered.push_back(&r);

  const std::size_t n_lines = transcript.lines.size();
  std::vector<std::uint8_t> active(n_lines, 0);
  for (std::size_t i = 0; i < n_lines; ++i)
    active[i] = !normalize_text(transcript.lines[i].text, config.normalization).empty();

  auto record_line = [&](std::size_t i, const std::set<std::string>& chosen) {
    auto& matches = out.result.lines[transcript.lines[i].line_id];
    for (const Region* r : offered)
      if (chosen.contains(r->id)) matches.push_back({r->id, 1.0, tag});
  };

  if (config.method == MatchMethod::llm_yes_no) {
    const std::size_t n_pairs = n_lines * offered.size();
    std::vector<std::optional<YesNoDecision>> decisions(n_pairs);
    std::vector<std::optional<std::string>> failures(n_pairs);
    parallel_for(n_pairs, config.max_in_flight, [&](std::size_t k) {
      const std::size_t i = k / offered.size();
      if (!active[i]) return;
      try {
        decisions[k] = llm_yes_no_decide(transcript.lines[i].text, *offered[k % offered.size()], provider);
      } catch (const UnscriptedPromptError&) {
        throw;
      } catch (const ProviderError& e) {
        failures[k] = e.what();
      }
    });
    for (std::size_t i = 0; i < n_lines; ++i) {
      const std::string& line_id = transcript.lines[i].line_id;
      out.result.lines[line_id];
      std::set<std::string> chosen;
      std::optional<std::string> failure;
      std::vector<Diagnostic> line_diags;
      for (std::size_t j = 0; j < offered.size(); ++j) {
        const std::size_t k = i * offered.size() + j;
        if (failures[k] && !failure) failure = offered[j]->id + ": " + *failures[k];
        if (!decisions[k]) continue;
        if (decisions[k]->relevant) chosen.insert(offered[j]->id);
        if (decisions[k]->diagnostic) {
          Diagnostic d = *decisions[k]->diagnostic;
          d.slide_id = slide.slide_id;
          d.line_id = line_id;
          line_diags.push_back(std::move(d));
        }
      }
      if (failure) {
        out.diagnostics.push_back({slide.slide_id, line_id, "", "provider_error", *failure});
        continue;
      }
      out.diagnostics.insert(out.diagnostics.end(), line_diags.begin(), line_diags.end());
      record_line(i, chosen);
    }
    return out;
  }

  std::vector<std::optional<SelectDecision>> decisions(n_lines);
  std::vector<std::optional<std::string>> failures(n_lines);
  parallel_for(n_lines, config.max_in_flight, [&](std::size_t i) {
    if (!active[i]) return;
    try {
      decisions[i] = llm_select(transcript.lines[i].text, offered, provider);
    } catch (const UnscriptedPromptError&) {
      throw;
    } catch (const ProviderError& e) {
      failures[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n_lines; ++i) {
    const std::string& line_id = transcript.lines[i].line_id;
    out.result.lines[line_id];
    if (failures[i]) {
      out.diagnostics.push_back({slide.slide_id, line_id, "", "provider_error", *failures[i]});
      continue;
    }
    if (!decisions[i]) continue;
    for (auto d : decisions[i]->diagnostics) {
      d.slide_id = slide.slide_id;
      d.line_id = line_id;
      out.diagnostics.push_back(std::move(d));
    }
    record_line(i, decisions[i]->region_ids);
  }
  return out;
}

}  // namespace slidesync
