// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_COMMON_HPP_
#define METASTYLE_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace metastyle {

// ---------------------------------------------------------------------------
// Error hierarchy.
//
// Every failure surfaced to callers derives from Error so that tools can map
// the category onto a process exit code:
//   ConfigError / UsageError -> bad flags, bad config keys, bad ranges
//   DataError                -> unreadable or inconsistent inputs on disk
//   NumericError             -> NaN/Inf detected in a computation
// DimensionError and ValueError cover programming-contract violations
// (mismatched shapes, out-of-range arguments) raised by library entry points.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class UsageError : public ConfigError {
 public:
  explicit UsageError(const std::string& msg) : ConfigError(msg) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

class ParseError : public DataError {
 public:
  explicit ParseError(const std::string& msg) : DataError(msg) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

class ValueError : public Error {
 public:
  explicit ValueError(const std::string& msg) : Error(msg) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

// ---------------------------------------------------------------------------
// Deterministic random numbers.
//
// All stochastic choices in the library flow through Rng. The engine is
// std::mt19937_64 (its output sequence is pinned by the standard), but every
// distribution is implemented here by hand: the standard library leaves
// uniform_real/normal distribution algorithms unspecified, and we need the
// same byte-for-byte draw sequence on every platform and compiler.
// ---------------------------------------------------------------------------

// Mixes a stream of integers into a well-distributed 64-bit seed. Used to
// derive independent child seeds ("streams") from one master seed, e.g.
// derive_seed(master, kStreamInit, epoch) for per-epoch shuffles.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::uint64_t a = 0,
                                 std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
  std::uint64_t s = seed;
  auto mix = [&s](std::uint64_t v) {
    s += 0x9e3779b97f4a7c15ull + v;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    s = z ^ (z >> 31);
    return s;
  };
  mix(a);
  mix(b);
  return mix(c);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Lemire multiply-shift; n must be positive.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ValueError("Rng::below: n must be positive");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(bits()) * n) >> 64);
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so that log(u1) is finite.
    double u1 = static_cast<double>((bits() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fisher-Yates shuffle driven by below(); deterministic for a given seed.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Draws k distinct indices from [0, n) (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k) {
    if (k > n) throw ValueError("sample_without_replacement: k exceeds n");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Named sub-stream tags so independent consumers of one master seed never
// collide. Values are arbitrary but frozen: changing them changes every
// reproducible trajectory.
enum class Stream : std::uint64_t {
  kModelInit = 1,
  kAugCurves = 2,
  kShuffle = 3,
  kGeometry = 4,
  kPixelNoise = 5,
  kSplit = 6,
  kFdrt = 7,
  kEval = 8,
};

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  return derive_seed(seed, static_cast<std::uint64_t>(stream), b, c);
}

// ---------------------------------------------------------------------------
// Worker-count plumbing. The library is written so that results never depend
// on the worker count; parallel sections only ever split work whose results
// are written to disjoint locations.
// ---------------------------------------------------------------------------

inline int num_workers() {
  if (const char* env = std::getenv("METASTYLE_NUM_WORKERS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError(
          "METASTYLE_NUM_WORKERS must be a positive integer, got '" +
          std::string(env) + "'");
    }
    return static_cast<int>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(i) for i in [0, n). Work is split statically across workers; fn
// must only write to locations owned by index i.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int workers = num_workers();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::exception_ptr first_error;
  std::mutex err_mu;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += w) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Small numeric helpers.
// ---------------------------------------------------------------------------

inline void ensure_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string(what) + " is not finite");
  }
}

inline bool all_finite(const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace metastyle

#endif  // METASTYLE_COMMON_HPP_
