#include <doctest.h>

#include "slidesync/model.hpp"
#include "support.hpp"

using namespace slidesync;
using testing::line;
using testing::textual;
using testing::visual;

namespace {

SlideDocument good_slide() {
  SlideDocument s;
  s.slide_id = "s1";
  s.image_size = {800, 600};
  s.regions = {textual("R1", {0, 0, 0.5, 0.2}, "Title"), visual("R2", {0.5, 0.2, 0.5, 0.8})};
  return s;
}

Transcript good_transcript() {
  Transcript t;
  t.slide_id = "s1";
  t.lines = {line("L1", 0, 2, "title"), line("L2", 2, 5, "the figure")};
  return t;
}

}  // namespace

TEST_CASE("well-formed single-slide dataset has no violations") {
  const SlideDocument s = good_slide();
  const Transcript t = good_transcript();
  GroundTruth gt{"s1", {{"L1", {"R1"}}, {"L2", {}}}};
  CHECK(validate_dataset(std::span(&s, 1), std::span(&t, 1), std::span(&gt, 1)).empty());
}

TEST_CASE("bbox x outside the unit square yields exactly one violation for that region") {
  SlideDocument s = good_slide();
  s.regions[1].bbox.x = 1.2;
  const auto v = validate_dataset(std::span(&s, 1), {}, {});
  REQUIRE(v.size() == 1);
  CHECK(v[0].entity.find("R2") != std::string::npos);
  CHECK(v[0].rule.find("x") != std::string::npos);
}

TEST_CASE("ground truth naming an unknown region is one dangling reference") {
  const SlideDocument s = good_slide();
  const Transcript t = good_transcript();
  GroundTruth gt{"s1", {{"L1", {"R9"}}}};
  const auto v = validate_dataset(std::span(&s, 1), std::span(&t, 1), std::span(&gt, 1));
  REQUIRE(v.size() == 1);
  CHECK(v[0].entity.find("R9") != std::string::npos);
}

TEST_CASE("region and line invariants") {
  SUBCASE("non-positive extent") {
    SlideDocument s = good_slide();
    s.regions[0].bbox.width = 0;
    CHECK_FALSE(validate_slide(s).empty());
  }
  SUBCASE("duplicate region ids") {
    SlideDocument s = good_slide();
    s.regions[1].id = "R1";
    CHECK_FALSE(validate_slide(s).empty());
  }
  SUBCASE("blank textual region") {
    SlideDocument s = good_slide();
    s.regions[0].text = "  \t";
    CHECK_FALSE(validate_slide(s).empty());
  }
  SUBCASE("visual region may be blank") { CHECK(validate_slide(good_slide()).empty()); }
  SUBCASE("confidence out of range") {
    SlideDocument s = good_slide();
    s.regions[0].confidence = 1.5;
    CHECK_FALSE(validate_slide(s).empty());
  }
  SUBCASE("unsorted lines") {
    Transcript t = good_transcript();
    std::swap(t.lines[0], t.lines[1]);
    CHECK_FALSE(validate_transcript(t).empty());
  }
  SUBCASE("duplicate line ids") {
    Transcript t = good_transcript();
    t.lines[1].line_id = "L1";
    CHECK_FALSE(validate_transcript(t).empty());
  }
  SUBCASE("word timing tolerance") {
    Transcript t = good_transcript();
    t.lines[0].words = std::vector<TimedWord>{{"title", -0.2, 2.2}};
    CHECK(validate_transcript(t).empty());
    (*t.lines[0].words)[0].t_end = 2.3;
    CHECK_FALSE(validate_transcript(t).empty());
  }
}

TEST_CASE("cross references between transcripts, ground truth and slides") {
  const SlideDocument s = good_slide();
  Transcript t = good_transcript();
  t.slide_id = "other";
  CHECK_FALSE(validate_dataset(std::span(&s, 1), std::span(&t, 1), {}).empty());

  const Transcript t1 = good_transcript();
  GroundTruth gt{"s1", {{"L7", {"R1"}}}};
  CHECK_FALSE(validate_dataset(std::span(&s, 1), std::span(&t1, 1), std::span(&gt, 1)).empty());

  SlideDocument twins[2] = {good_slide(), good_slide()};
  CHECK_FALSE(validate_dataset(twins, {}, {}).empty());
}

TEST_CASE("validation is pure") {
  SlideDocument s = good_slide();
  s.regions[0].bbox.y = -1;
  CHECK(validate_slide(s) == validate_slide(s));
}

TEST_CASE("threshold presets") {
  CHECK(threshold_preset("T-1") == ThresholdPolicy{"T-1", 0.8, 0.6});
  CHECK(threshold_preset("T-2") == ThresholdPolicy{"T-2", 0.7, 0.6});
  CHECK(threshold_preset("T-3") == ThresholdPolicy{"T-3", 0.6, 0.6});
  CHECK(threshold_preset("best-fuzzy")->textual_threshold == 0.45);
  CHECK(threshold_preset("best-sbert")->textual_threshold == 0.55);
  CHECK(threshold_preset("best-specter")->textual_threshold == 0.85);
  CHECK(threshold_preset("best-scibert")->textual_threshold == 0.75);
  CHECK_FALSE(threshold_preset("T-9"));
  for (const auto& name : threshold_preset_names()) CHECK(threshold_preset(name));
}

TEST_CASE("region kind strings") {
  CHECK(region_kind_from_string("visual") == RegionKind::visual);
  CHECK(to_string(RegionKind::textual) == "textual");
  CHECK_FALSE(region_kind_from_string("figure"));
}

TEST_CASE("alignment predicted sets") {
  AlignmentResult r{"s1", "fuzzy", {{"L1", {{"R1", 0.9, "fuzzy"}, {"R2", 0.7, "fuzzy"}}}, {"L2", {}}}};
  CHECK(r.predicted("L1") == std::set<std::string>{"R1", "R2"});
  CHECK(r.predicted("L2").empty());
  CHECK(r.predicted("L3").empty());
}
