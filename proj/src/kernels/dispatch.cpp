#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "slidesync/kernels/kernels.hpp"

namespace slidesync::kernels {

namespace {

struct Table {
  std::size_t (*edit_distance)(const std::uint32_t*, std::size_t, const std::uint32_t*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*threshold_mask)(const double*, const double*, std::uint8_t*, std::size_t);
};

constexpr Table kScalar{scalar::edit_distance, scalar::dot, scalar::threshold_mask};
constexpr Table kAvx2{avx2::edit_distance, avx2::dot, avx2::threshold_mask};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("SLIDESYNC_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Backend::avx2;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

const Table& table() { return current().load(std::memory_order_relaxed) == Backend::avx2 ? kAvx2 : kScalar; }

}  // namespace

std::string_view to_string(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

bool backend_available(Backend b) { return b == Backend::scalar || cpu_has_avx2(); }

Backend active_backend() { return current().load(); }

void force_backend(Backend b) {
  if (!backend_available(b)) throw std::invalid_argument("kernel backend not supported by this CPU");
  current().store(b);
}

std::size_t edit_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  return table().edit_distance(a.data(), a.size(), b.data(), b.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  return table().dot(a.data(), b.data(), a.size());
}

void threshold_mask(std::span<const double> scores, std::span<const double> thresholds,
                    std::span<std::uint8_t> out) {
  if (scores.size() != thresholds.size() || scores.size() != out.size())
    throw std::invalid_argument("threshold_mask: length mismatch");
  table().threshold_mask(scores.data(), thresholds.data(), out.data(), scores.size());
}

}  // namespace slidesync::kernels
