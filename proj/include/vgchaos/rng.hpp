#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace vgchaos {

// Philox4x32-10 counter-based generator. A (seed, stream) pair names an
// independent sequence; the block counter advances within it.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  using result_type = std::uint32_t;

  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  static Block bijection(Block ctr, Key key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u32(); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  // Gamma(shape, scale 1), any shape > 0.
  double gamma(double shape);
  double rademacher();

 private:
  void refill();

  Key key_{};
  std::uint64_t block_ = 0;
  std::uint64_t stream_ = 0;
  Block buffer_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Derive a seed for an independent purpose (e.g. the second sample set of an experiment).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose) {
  return splitmix64(seed ^ splitmix64(purpose + 0x632be59bd9b4e019ULL));
}

inline constexpr std::size_t kChunkSize = std::size_t{1} << 15;

unsigned worker_count();

// Runs fn(rng, begin, end) over fixed chunks of [0, n). Chunk c always uses
// stream c of the seed, so results depend only on (seed, kChunkSize).
template <class Fn>
void for_each_chunk(std::size_t n, std::uint64_t seed, Fn&& fn) {
  const std::size_t chunks = (n + kChunkSize - 1) / kChunkSize;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), chunks));
  auto run = [&](std::size_t c) {
    Philox4x32 rng(seed, c);
    const std::size_t b = c * kChunkSize;
    fn(rng, b, std::min(n, b + kChunkSize));
  };
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < chunks; c = next++) {
        try {
          run(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace vgchaos
