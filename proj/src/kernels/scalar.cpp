#include <algorithm>
#include <vector>

#include "slidesync/kernels/kernels.hpp"

namespace slidesync::kernels::scalar {

std::size_t edit_distance(const std::uint32_t* a, std::size_t n, const std::uint32_t* b, std::size_t m) {
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> row(m + 1);
  for (std::size_t j = 0; j <= m; ++j) row[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] != b[j - 1] ? 1 : 0);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[m];
}

double dot(const double* a, const double* b, std::size_t n) {
  // Four interleaved partial sums, reduced as (l0 + l1) + (l2 + l3), then
  // the tail in order. Matches the vector lane layout exactly.
  double lane[4] = {0, 0, 0, 0};
  const std::size_t body = n - n % 4;
  for (std::size_t i = 0; i < body; i += 4) {
    for (std::size_t k = 0; k < 4; ++k) {
      const double p = a[i + k] * b[i + k];
      lane[k] = lane[k] + p;
    }
  }
  double sum = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (std::size_t i = body; i < n; ++i) {
    const double p = a[i] * b[i];
    sum = sum + p;
  }
  return sum;
}

void threshold_mask(const double* scores, const double* thresholds, std::uint8_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = scores[i] >= thresholds[i] ? 1 : 0;
}

}  // namespace slidesync::kernels::scalar
