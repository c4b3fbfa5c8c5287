#include "slidesync/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "json_util.hpp"
#include "slidesync/text.hpp"

namespace slidesync {

using detail::json;

namespace {

std::size_t intersection_size(const RegionSet& a, const RegionSet& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.contains(x) ? 1 : 0;
  return n;
}

double harmonic(double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); }

json line_json(const LineScores& s) {
  return {{"sc", detail::round6(s.sc)},
          {"sm", detail::round6(s.sm)},
          {"p", detail::round6(s.precision)},
          {"r", detail::round6(s.recall)},
          {"f1", detail::round6(s.f1)}};
}

json summary_json(const SummaryStats& s) {
  return {{"min", detail::round6(s.min)},
          {"max", detail::round6(s.max)},
          {"mean", detail::round6(s.mean)},
          {"median", detail::round6(s.median)},
          {"count", s.count}};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

double correctness_score(const RegionSet& pred, const RegionSet& gt) {
  if (pred.empty()) return 1.0;
  return static_cast<double>(intersection_size(pred, gt)) / static_cast<double>(pred.size());
}

double missing_score(const RegionSet& pred, const RegionSet& gt) {
  if (gt.empty()) return 0.0;
  std::size_t missing = 0;
  for (const auto& x : gt) missing += pred.contains(x) ? 0 : 1;
  return static_cast<double>(missing) / static_cast<double>(gt.size());
}

PrecisionRecallF1 precision_recall_f1(const RegionSet& pred, const RegionSet& gt) {
  PrecisionRecallF1 out;
  out.precision = pred.empty() ? 0.0 : static_cast<double>(intersection_size(pred, gt)) / static_cast<double>(pred.size());
  out.recall = 1.0 - missing_score(pred, gt);
  out.f1 = harmonic(out.precision, out.recall);
  return out;
}

LineScores score_line(const RegionSet& pred, const RegionSet& gt) {
  const auto prf = precision_recall_f1(pred, gt);
  return {correctness_score(pred, gt), missing_score(pred, gt), prf.precision, prf.recall, prf.f1};
}

AlignmentScores evaluate_alignment(std::span<const AlignmentResult> results, std::span<const GroundTruth> gts) {
  std::map<std::string, const AlignmentResult*> by_slide;
  for (const auto& r : results) by_slide.emplace(r.slide_id, &r);

  AlignmentScores out;
  LineScores sum;
  for (const auto& gt : gts) {
    auto it = by_slide.find(gt.slide_id);
    for (const auto& [line_id, expected] : gt.lines) {
      const RegionSet pred = it == by_slide.end() ? RegionSet{} : it->second->predicted(line_id);
      const LineScores s = score_line(pred, expected);
      out.per_line.emplace_back(gt.slide_id + "/" + line_id, s);
      sum.sc += s.sc;
      sum.sm += s.sm;
      sum.precision += s.precision;
      sum.recall += s.recall;
      sum.f1 += s.f1;
    }
  }
  if (!out.per_line.empty()) {
    const double n = static_cast<double>(out.per_line.size());
    out.avg = {sum.sc / n, sum.sm / n, sum.precision / n, sum.recall / n, sum.f1 / n};
  }
  return out;
}

AlignmentScores evaluate_alignment(const AlignmentResult& result, const GroundTruth& gt) {
  return evaluate_alignment(std::span(&result, 1), std::span(&gt, 1));
}

std::string write_scores(const AlignmentScores& scores) {
  json per_line = json::object();
  for (const auto& [key, s] : scores.per_line) per_line[key] = line_json(s);
  return detail::dump({{"per_line", std::move(per_line)}, {"avg", line_json(scores.avg)}, {"lines", scores.per_line.size()}});
}

std::string format_scores_table(const AlignmentScores& scores) {
  std::ostringstream os;
  os << "lines " << scores.per_line.size() << "\n";
  os << "      S_c     S_m       P       R      F1\n";
  const auto& a = scores.avg;
  os << "avg" << pad(fixed(a.sc, 3), 6) << pad(fixed(a.sm, 3), 8) << pad(fixed(a.precision, 3), 8)
     << pad(fixed(a.recall, 3), 8) << pad(fixed(a.f1, 3), 8) << "\n";
  return os.str();
}

double cer(std::string_view ref, std::string_view hyp) {
  const auto r = to_codepoints(ref);
  if (r.empty()) return hyp.empty() ? 0.0 : 1.0;
  return static_cast<double>(char_edit_distance(ref, hyp)) / static_cast<double>(r.size());
}

double wer(std::string_view ref, std::string_view hyp) {
  const auto r = split_whitespace(ref);
  const auto h = split_whitespace(hyp);
  if (r.empty()) return h.empty() ? 0.0 : 1.0;
  return static_cast<double>(token_edit_distance(r, h)) / static_cast<double>(r.size());
}

std::size_t edit_distance(std::string_view ref, std::string_view hyp) {
  return token_edit_distance(split_whitespace(ref), split_whitespace(hyp));
}

PrecisionRecallF1 transcription_prf(std::string_view ref, std::string_view hyp) {
  std::map<std::string, int> ref_bag;
  std::map<std::string, int> hyp_bag;
  std::size_t n_ref = 0;
  std::size_t n_hyp = 0;
  for (const auto& t : split_whitespace(normalize_text(ref))) ++ref_bag[t], ++n_ref;
  for (const auto& t : split_whitespace(normalize_text(hyp))) ++hyp_bag[t], ++n_hyp;
  std::size_t common = 0;
  for (const auto& [tok, c] : hyp_bag) {
    auto it = ref_bag.find(tok);
    if (it != ref_bag.end()) common += static_cast<std::size_t>(std::min(c, it->second));
  }
  PrecisionRecallF1 out;
  out.precision = n_hyp == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(n_hyp);
  out.recall = n_ref == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(n_ref);
  out.f1 = harmonic(out.precision, out.recall);
  return out;
}

TranscriptionScores score_transcription(std::string_view ref, std::string_view hyp) {
  const auto prf = transcription_prf(ref, hyp);
  return {cer(ref, hyp), wer(ref, hyp), static_cast<double>(edit_distance(ref, hyp)), prf.precision, prf.recall, prf.f1};
}

std::string transcript_text(const Transcript& t) {
  std::string out;
  for (const auto& l : t.lines) {
    if (!out.empty()) out.push_back(' ');
    out += l.text;
  }
  return out;
}

TranscriptionReport evaluate_transcription(std::span<const Transcript> refs, std::span<const Transcript> hyps) {
  std::map<std::string, const Transcript*> hyp_by_id;
  for (const auto& h : hyps) hyp_by_id.emplace(h.slide_id, &h);
  TranscriptionReport out;
  TranscriptionScores sum;
  for (const auto& r : refs) {
    auto it = hyp_by_id.find(r.slide_id);
    const std::string hyp = it == hyp_by_id.end() ? std::string() : transcript_text(*it->second);
    const TranscriptionScores s = score_transcription(transcript_text(r), hyp);
    out.per_sample.emplace_back(r.slide_id, s);
    sum.cer += s.cer;
    sum.wer += s.wer;
    sum.edit_distance += s.edit_distance;
    sum.precision += s.precision;
    sum.recall += s.recall;
    sum.f1 += s.f1;
  }
  if (!out.per_sample.empty()) {
    const double n = static_cast<double>(out.per_sample.size());
    out.avg = {sum.cer / n, sum.wer / n, sum.edit_distance / n, sum.precision / n, sum.recall / n, sum.f1 / n};
  }
  return out;
}

std::string write_transcription_report(const TranscriptionReport& report) {
  auto row = [](const TranscriptionScores& s) {
    return json{{"cer", detail::round6(s.cer)},           {"wer", detail::round6(s.wer)},
                {"edit_distance", detail::round6(s.edit_distance)}, {"p", detail::round6(s.precision)},
                {"r", detail::round6(s.recall)},          {"f1", detail::round6(s.f1)}};
  };
  json per = json::object();
  for (const auto& [key, s] : report.per_sample) per[key] = row(s);
  return detail::dump({{"per_sample", std::move(per)}, {"avg", row(report.avg)}, {"samples", report.per_sample.size()}});
}

SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  const std::size_t mid = values.size() / 2;
  s.median = values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2;
  return s;
}

CorpusStats corpus_stats(std::span<const DatasetEntry> dataset) {
  std::vector<double> durations;
  std::vector<double> ocr;
  std::vector<double> asr;
  for (const auto& e : dataset) {
    const auto& lines = e.transcript.lines;
    if (!lines.empty()) durations.push_back(lines.back().t_end - lines.front().t_start);
    std::size_t ocr_words = 0;
    for (const auto& r : e.slide.regions) ocr_words += split_whitespace(normalize_text(r.text)).size();
    ocr.push_back(static_cast<double>(ocr_words));
    std::size_t asr_words = 0;
    for (const auto& l : lines) asr_words += split_whitespace(normalize_text(l.text)).size();
    asr.push_back(static_cast<double>(asr_words));
  }
  return {summarize(std::move(durations)), summarize(std::move(ocr)), summarize(std::move(asr))};
}

std::string write_corpus_stats(const CorpusStats& stats) {
  return detail::dump({{"duration_s", summary_json(stats.duration_s)},
                       {"ocr_words", summary_json(stats.ocr_words)},
                       {"asr_words", summary_json(stats.asr_words)}});
}

std::string format_corpus_stats(const CorpusStats& stats) {
  std::ostringstream os;
  os << "                          Min      Max      Avg   Median\n";
  auto row = [&](const char* name, const SummaryStats& s) {
    std::string label(name);
    label.resize(22, ' ');
    os << label << pad(fixed(s.min, 2), 8) << pad(fixed(s.max, 2), 9) << pad(fixed(s.mean, 2), 9)
       << pad(fixed(s.median, 2), 9) << "\n";
  };
  row("Duration (s)", stats.duration_s);
  row("Word count in OCR", stats.ocr_words);
  row("Word count in ASR", stats.asr_words);
  return os.str();
}

}  // namespace slidesync
