#include <doctest.h>

#include <cstring>
#include <vector>

#include "oracle.hpp"
#include "slidesync/kernels/kernels.hpp"
#include "support.hpp"

using namespace slidesync;
namespace k = slidesync::kernels;

namespace {

std::vector<std::uint32_t> random_symbols(testing::Rng& rng, int max_len, int alphabet) {
  std::vector<std::uint32_t> v(static_cast<std::size_t>(rng.integer(0, max_len)));
  for (auto& x : v) x = static_cast<std::uint32_t>(rng.integer(0, alphabet - 1));
  return v;
}

std::uint64_t bits(double d) {
  std::uint64_t u;
  std::memcpy(&u, &d, sizeof u);
  return u;
}

}  // namespace

TEST_CASE("scalar edit distance matches the full-matrix oracle") {
  testing::Rng rng(1);
  for (int n = 0; n < 500; ++n) {
    const auto a = random_symbols(rng, 40, 4);
    const auto b = random_symbols(rng, 40, 4);
    CHECK(k::scalar::edit_distance(a.data(), a.size(), b.data(), b.size()) == oracle::levenshtein(a, b));
  }
}

TEST_CASE("avx2 kernels agree exactly with scalar" * doctest::skip(!k::backend_available(k::Backend::avx2))) {
  testing::Rng rng(2);
  SUBCASE("edit distance, including lengths past one vector") {
    for (int n = 0; n < 500; ++n) {
      const auto a = random_symbols(rng, n % 5 == 0 ? 300 : 40, n % 2 ? 3 : 50);
      const auto b = random_symbols(rng, n % 5 == 0 ? 300 : 40, n % 2 ? 3 : 50);
      CHECK(k::avx2::edit_distance(a.data(), a.size(), b.data(), b.size()) ==
            k::scalar::edit_distance(a.data(), a.size(), b.data(), b.size()));
    }
  }
  SUBCASE("dot product is bit-identical") {
    for (int n = 0; n < 300; ++n) {
      std::vector<double> a(static_cast<std::size_t>(rng.integer(0, 300))), b(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.real(-1, 1), b[i] = rng.real(-1, 1);
      CHECK(bits(k::avx2::dot(a.data(), b.data(), a.size())) == bits(k::scalar::dot(a.data(), b.data(), a.size())));
    }
  }
  SUBCASE("threshold mask") {
    for (int n = 0; n < 200; ++n) {
      const auto len = static_cast<std::size_t>(rng.integer(0, 70));
      std::vector<double> s(len), t(len);
      for (std::size_t i = 0; i < len; ++i) {
        s[i] = rng.real();
        t[i] = rng.coin(0.2) ? s[i] : rng.real();
      }
      std::vector<std::uint8_t> x(len, 7), y(len, 9);
      k::scalar::threshold_mask(s.data(), t.data(), x.data(), len);
      k::avx2::threshold_mask(s.data(), t.data(), y.data(), len);
      CHECK(x == y);
    }
  }
}

TEST_CASE("dispatch honours force_backend") {
  const k::Backend saved = k::active_backend();
  k::force_backend(k::Backend::scalar);
  CHECK(k::active_backend() == k::Backend::scalar);
  const std::vector<std::uint32_t> a{1, 2, 3}, b{1, 3};
  CHECK(k::edit_distance(a, b) == 1);
  if (k::backend_available(k::Backend::avx2)) {
    k::force_backend(k::Backend::avx2);
    CHECK(k::active_backend() == k::Backend::avx2);
    CHECK(k::edit_distance(a, b) == 1);
  } else {
    CHECK_THROWS_AS(k::force_backend(k::Backend::avx2), std::invalid_argument);
  }
  k::force_backend(saved);
}

TEST_CASE("span wrappers check lengths and handle threshold ties") {
  const std::vector<double> a{1, 2, 3}, b{1, 2};
  CHECK_THROWS(k::dot(a, b));
  const std::vector<double> s{0.6, 0.59999, 0.61}, t{0.6, 0.6, 0.6};
  std::vector<std::uint8_t> out(3);
  k::threshold_mask(s, t, out);
  CHECK(out == std::vector<std::uint8_t>{1, 0, 1});
  CHECK(k::dot(std::vector<double>{}, std::vector<double>{}) == 0.0);
}
