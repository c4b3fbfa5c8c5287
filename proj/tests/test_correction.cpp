#include <doctest.h>

#include <functional>

#include "slidesync/correction.hpp"
#include "slidesync/error.hpp"
#include "slidesync/text.hpp"
#include "support.hpp"

using namespace slidesync;
using testing::line;
using testing::textual;
using testing::visual;

namespace {

class FnLlm final : public LlmProvider {
 public:
  explicit FnLlm(std::function<std::string(std::string_view)> fn) : fn_(std::move(fn)) {}
  std::string complete(std::string_view prompt) override { return fn_(prompt); }
  std::string model_tag() const override { return "fn"; }

 private:
  std::function<std::string(std::string_view)> fn_;
};

std::string line_of(std::string_view prompt) {
  const auto start = prompt.find("Transcript line: \"") + 18;
  const auto end = prompt.find("\"\nRewrite");
  return std::string(prompt.substr(start, end - start));
}

Lexicon lex(std::initializer_list<std::string> words) {
  Lexicon l;
  for (const auto& w : words) ++l[w];
  return l;
}

std::string fix(std::string text, const Lexicon& l) { return correct_lexical(line("L", 0, 1, std::move(text)), l).line.text; }

}  // namespace

TEST_CASE("slide lexicon") {
  SlideDocument s{"s", "", {1, 1}, {textual("R1", {0, 0, 1, 1}, "Deep Deep Learning")}};
  CHECK(build_slide_lexicon(s) == Lexicon{{"deep", 2}, {"learning", 1}});
  CHECK(build_slide_lexicon(SlideDocument{}).empty());
  SlideDocument mixed{"m", "", {1, 1},
                      {textual("R1", {0, 0, 1, 0.3}, "The Loss, the loss!"), visual("R2", {0, 0.3, 1, 0.3}, "ignored words"),
                       textual("R3", {0, 0.6, 1, 0.3}, "a to be Loss")}};
  CHECK(build_slide_lexicon(mixed) == Lexicon{{"the", 2}, {"loss", 3}});
}

TEST_CASE("lexical substitution rules") {
  CHECK(fix("lerning", lex({"learning"})) == "learning");
  CHECK(fix("learning", lex({"learning"})) == "learning");
  CHECK(fix("data", lex({"date", "dana"})) == "data");    // 0.75 each: tie, keep
  CHECK(fix("data", lex({"date", "dates"})) == "date");   // 0.75 beats 0.6
  CHECK(fix("dta", lex({"learning"})) == "dta");          // below the gate
  CHECK(fix("(lerning),", lex({"learning"})) == "(learning),");
  CHECK(fix("so  lerning\tis", lex({"learning"})) == "so  learning\tis");

  const auto c = correct_lexical(line("L", 0, 1, "lerning"), lex({"learning"}));
  REQUIRE(c.subs.size() == 1);
  CHECK(c.subs[0] == Substitution{"lerning", "learning", 7.0 / 8.0});
}

TEST_CASE("lexical correction keeps timing and fixes timed words") {
  TranscriptLine l = line("L1", 1.5, 4.0, "deep lerning");
  l.words = std::vector<TimedWord>{{"deep", 1.5, 2.0}, {"lerning", 2.0, 4.0}};
  const auto c = correct_lexical(l, lex({"deep", "learning"}));
  CHECK(c.line.t_start == 1.5);
  CHECK(c.line.t_end == 4.0);
  CHECK(c.line.text == "deep learning");
  CHECK((*c.line.words)[1] == TimedWord{"learning", 2.0, 4.0});
}

TEST_CASE("lexical correction is idempotent and only introduces lexicon tokens") {
  testing::Rng rng(31);
  const std::vector<std::string> vocab{"alignment", "speech", "slide", "region", "token", "matching", "fuzzy"};
  for (int n = 0; n < 100; ++n) {
    SlideDocument s{"s", "", {1, 1}, {}};
    std::string text;
    for (int k = rng.integer(1, 6); k > 0; --k) text += rng.pick(vocab) + " ";
    s.regions.push_back(textual("R", {0, 0, 1, 1}, text));
    Transcript t{"s", {}};
    for (int i = 0; i < 4; ++i) {
      std::string words;
      for (int k = rng.integer(1, 6); k > 0; --k) {
        std::string w = rng.coin(0.6) ? rng.pick(vocab) : rng.word(3, 8);
        if (w.size() > 3 && rng.coin(0.5)) w[static_cast<std::size_t>(rng.integer(0, int(w.size()) - 1))] = 'x';
        words += w + (rng.coin(0.2) ? ", " : " ");
      }
      t.lines.push_back(line("L" + std::to_string(i), i, i + 1, words));
    }
    const auto once = correct_transcript_lexical(t, s);
    const auto twice = correct_transcript_lexical(once.transcript, s);
    CHECK(twice.transcript == once.transcript);
    REQUIRE(once.transcript.lines.size() == t.lines.size());

    const Lexicon l = build_slide_lexicon(s);
    for (std::size_t i = 0; i < t.lines.size(); ++i) {
      CHECK(once.transcript.lines[i].line_id == t.lines[i].line_id);
      CHECK(once.transcript.lines[i].t_start == t.lines[i].t_start);
      CHECK(once.transcript.lines[i].t_end == t.lines[i].t_end);
      const auto before = split_whitespace(normalize_text(t.lines[i].text));
      for (const auto& tok : split_whitespace(normalize_text(once.transcript.lines[i].text)))
        CHECK((l.contains(tok) || std::find(before.begin(), before.end(), tok) != before.end()));
    }
  }
}

TEST_CASE("correction prompt is exact") {
  CHECK(render_correction_prompt("Title\nBody", "the line") ==
        "Slide text:\nTitle\nBody\nTranscript line: \"the line\"\nRewrite the transcript line, correcting only "
        "misrecognized words using the slide text. Reply with the corrected line only.");
  SlideDocument s{"s", "", {1, 1}, {textual("R1", {0, 0, 1, 1}, "Title"), visual("R2", {0, 0, 1, 1}, "cap"),
                                    textual("R3", {0, 0, 1, 1}, "Body")}};
  CHECK(slide_context_text(s) == "Title\nBody");
}

TEST_CASE("LLM correction") {
  SlideDocument s{"s", "", {1, 1}, {textual("R1", {0, 0, 1, 1}, "Transformers")}};
  Transcript t{"s", {line("L1", 0, 1, "trans formers rock"), line("L2", 1, 2, "second"), line("L3", 2, 3, "third")}};
  t.lines[0].words = std::vector<TimedWord>{{"trans", 0, 0.3}, {"formers", 0.3, 0.6}, {"rock", 0.6, 1}};
  t.lines[2].words = std::vector<TimedWord>{{"third", 2, 3}};

  SUBCASE("echo leaves the transcript unchanged") {
    FnLlm echo([](std::string_view p) { return line_of(p); });
    const auto out = correct_llm(t, s, echo);
    CHECK(out.transcript == t);
    CHECK(out.diagnostics.empty());
  }
  SUBCASE("one scripted fix touches only that line and drops stale word timings") {
    FnLlm fixer([](std::string_view p) {
      const std::string l = line_of(p);
      return l == "trans formers rock" ? std::string("\"Transformers rock\"\n") : l;
    });
    const auto out = correct_llm(t, s, fixer);
    CHECK(out.transcript.lines[0].text == "Transformers rock");
    CHECK_FALSE(out.transcript.lines[0].words);
    CHECK(out.transcript.lines[0].t_start == 0);
    CHECK(out.transcript.lines[1] == t.lines[1]);
    CHECK(out.transcript.lines[2] == t.lines[2]);
  }
  SUBCASE("a failure on line 2 keeps it and records a diagnostic") {
    FnLlm flaky([](std::string_view p) -> std::string {
      const std::string l = line_of(p);
      if (l == "second") throw ProviderError("503");
      return l + "!";
    });
    const auto out = correct_llm(t, s, flaky);
    CHECK(out.transcript.lines[0].text == "trans formers rock!");
    CHECK(out.transcript.lines[1].text == "second");
    CHECK(out.transcript.lines[2].text == "third!");
    CHECK((*out.transcript.lines[2].words)[0].word == "third!");
    REQUIRE(out.diagnostics.size() == 1);
    CHECK(out.diagnostics[0].line_id == "L2");
  }
  SUBCASE("unscripted prompts propagate") {
    ScriptedLlm none({});
    CHECK_THROWS_AS(correct_llm(t, s, none), UnscriptedPromptError);
  }
}

TEST_CASE("substitution log JSON") {
  const std::string json = write_substitution_logs({{"L1", {{"lerning", "learning", 0.875}}}, {"L2", {}}});
  CHECK(json.find("\"from\": \"lerning\"") != std::string::npos);
  CHECK(json.find("\"similarity\": 0.875") != std::string::npos);
  CHECK(json.find("\"line_id\": \"L2\"") != std::string::npos);
}
