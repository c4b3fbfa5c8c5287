#pragma once

// Evaluation math: alignment scores against ground truth, transcription
// error rates, and descriptive corpus statistics.

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slidesync/ingest.hpp"
#include "slidesync/model.hpp"

namespace slidesync {

using RegionSet = std::set<std::string>;

/// |pred ∩ gt| / |pred|; 1 when nothing is predicted.
double correctness_score(const RegionSet& pred, const RegionSet& gt);

/// |gt \ pred| / |gt|; 0 when nothing is expected.
double missing_score(const RegionSet& pred, const RegionSet& gt);

struct PrecisionRecallF1 {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

/// Precision is 0 (not 1) for an empty prediction; recall = 1 - missing_score.
PrecisionRecallF1 precision_recall_f1(const RegionSet& pred, const RegionSet& gt);

struct LineScores {
  double sc = 0;
  double sm = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct AlignmentScores {
  std::vector<std::pair<std::string, LineScores>> per_line;  // key "slide_id/line_id"
  LineScores avg;
};

LineScores score_line(const RegionSet& pred, const RegionSet& gt);

/// Evaluates every ground-truth line; a line missing from the prediction
/// counts as predicting nothing. Averages are unweighted over all lines of
/// all slides. Predictions are paired with ground truth by slide_id.
AlignmentScores evaluate_alignment(std::span<const AlignmentResult> results, std::span<const GroundTruth> gts);
AlignmentScores evaluate_alignment(const AlignmentResult& result, const GroundTruth& gt);

std::string write_scores(const AlignmentScores& scores);
std::string format_scores_table(const AlignmentScores& scores);

/// Character error rate over code points. 0 for two empty strings, 1 when
/// only the reference is empty.
double cer(std::string_view ref, std::string_view hyp);
/// Word error rate over whitespace tokens, same empty-reference rules.
double wer(std::string_view ref, std::string_view hyp);
/// Raw word-level Levenshtein distance.
std::size_t edit_distance(std::string_view ref, std::string_view hyp);

/// Bag-of-words comparison of normalized tokens with multiset intersection.
PrecisionRecallF1 transcription_prf(std::string_view ref, std::string_view hyp);

struct TranscriptionScores {
  double cer = 0;
  double wer = 0;
  double edit_distance = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

TranscriptionScores score_transcription(std::string_view ref, std::string_view hyp);

struct TranscriptionReport {
  std::vector<std::pair<std::string, TranscriptionScores>> per_sample;
  TranscriptionScores avg;  // per-sample mean of every column
};

/// Pairs samples by key; each sample's text is its lines joined by spaces.
TranscriptionReport evaluate_transcription(std::span<const Transcript> refs, std::span<const Transcript> hyps);
std::string write_transcription_report(const TranscriptionReport& report);
std::string transcript_text(const Transcript& t);

struct SummaryStats {
  double min = 0;
  double max = 0;
  double mean = 0;
  double median = 0;
  std::size_t count = 0;
};

SummaryStats summarize(std::vector<double> values);

struct CorpusStats {
  SummaryStats duration_s;  // last line t_end - first line t_start
  SummaryStats ocr_words;
  SummaryStats asr_words;
};

CorpusStats corpus_stats(std::span<const DatasetEntry> dataset);
std::string write_corpus_stats(const CorpusStats& stats);
std::string format_corpus_stats(const CorpusStats& stats);

}  // namespace slidesync
