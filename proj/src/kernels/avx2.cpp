#include <algorithm>
#include <stdexcept>
#include <vector>

#include "slidesync/kernels/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
#define SLIDESYNC_X86 1
#include <immintrin.h>
#else
#define SLIDESYNC_X86 0
#endif

namespace slidesync::kernels::avx2 {

#if SLIDESYNC_X86

#define SLIDESYNC_TARGET_AVX2 __attribute__((target("avx2")))

// Anti-diagonal Levenshtein. Cells with equal i + j are independent, so each
// diagonal is filled 8 rows at a time. Buffers are indexed by row i; b is
// reversed so that b[j - 1] for consecutive i is a contiguous load.
SLIDESYNC_TARGET_AVX2
std::size_t edit_distance(const std::uint32_t* a, std::size_t n, const std::uint32_t* b, std::size_t m) {
  if (n == 0) return m;
  if (m == 0) return n;

  std::vector<std::uint32_t> rb(b, b + m);
  std::reverse(rb.begin(), rb.end());

  const std::size_t width = n + 1 + 8;
  std::vector<std::int32_t> buf(3 * width, 0);
  std::int32_t* prev2 = buf.data();
  std::int32_t* prev1 = prev2 + width;
  std::int32_t* cur = prev1 + width;

  const __m256i ones = _mm256_set1_epi32(1);
  prev1[0] = 0;  // diagonal 0

  for (std::size_t d = 1; d <= n + m; ++d) {
    const std::size_t lo = d > m ? d - m : 1;
    const std::size_t hi = std::min(n, d - 1);
    std::size_t i = lo;
    if (lo <= hi) {
      for (; i + 8 <= hi + 1; i += 8) {
        const __m256i up = _mm256_add_epi32(
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev1 + i - 1)), ones);
        const __m256i left = _mm256_add_epi32(
            _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev1 + i)), ones);
        const __m256i diag = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(prev2 + i - 1));
        const __m256i av = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i - 1));
        const __m256i bv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(rb.data() + (m - d + i)));
        // cmpeq yields -1 on equal lanes, so 1 + eq is the substitution cost.
        const __m256i cost = _mm256_add_epi32(ones, _mm256_cmpeq_epi32(av, bv));
        const __m256i best = _mm256_min_epi32(_mm256_min_epi32(up, left), _mm256_add_epi32(diag, cost));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(cur + i), best);
      }
      for (; i <= hi; ++i) {
        const std::int32_t sub = prev2[i - 1] + (a[i - 1] != rb[m - d + i] ? 1 : 0);
        cur[i] = std::min({prev1[i - 1] + 1, prev1[i] + 1, sub});
      }
    }
    if (d <= m) cur[0] = static_cast<std::int32_t>(d);
    if (d <= n) cur[d] = static_cast<std::int32_t>(d);

    std::int32_t* recycled = prev2;
    prev2 = prev1;
    prev1 = cur;
    cur = recycled;
  }
  return static_cast<std::size_t>(prev1[n]);
}

SLIDESYNC_TARGET_AVX2
double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4) {
    const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, p);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = body; i < n; ++i) {
    const double p = a[i] * b[i];
    sum = sum + p;
  }
  return sum;
}

SLIDESYNC_TARGET_AVX2
void threshold_mask(const double* scores, const double* thresholds, std::uint8_t* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ge = _mm256_cmp_pd(_mm256_loadu_pd(scores + i), _mm256_loadu_pd(thresholds + i), _CMP_GE_OQ);
    const int bits = _mm256_movemask_pd(ge);
    out[i] = bits & 1;
    out[i + 1] = (bits >> 1) & 1;
    out[i + 2] = (bits >> 2) & 1;
    out[i + 3] = (bits >> 3) & 1;
  }
  for (; i < n; ++i) out[i] = scores[i] >= thresholds[i] ? 1 : 0;
}

#else

std::size_t edit_distance(const std::uint32_t*, std::size_t, const std::uint32_t*, std::size_t) {
  throw std::logic_error("avx2 kernels unavailable on this architecture");
}
double dot(const double*, const double*, std::size_t) {
  throw std::logic_error("avx2 kernels unavailable on this architecture");
}
void threshold_mask(const double*, const double*, std::uint8_t*, std::size_t) {
  throw std::logic_error("avx2 kernels unavailable on this architecture");
}

#endif

}  // namespace slidesync::kernels::avx2
