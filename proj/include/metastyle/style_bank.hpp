// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_STYLE_BANK_HPP_
#define METASTYLE_STYLE_BANK_HPP_

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metastyle/common.hpp"
#include "metastyle/style_stats.hpp"

namespace metastyle {

// Persistent memory of per-domain style summaries. Saving into an occupied
// slot merges by instance-count-weighted average (for both the means and the
// standard deviations), so repeated saves of batch summaries converge to the
// summary of the union of the batches' means.
class StyleBank {
 public:
  bool has(int domain_id) const { return slots_.count(domain_id) != 0; }

  std::size_t size() const { return slots_.size(); }

  std::vector<int> domain_ids() const {
    std::vector<int> ids;
    ids.reserve(slots_.size());
    for (const auto& [id, _] : slots_) ids.push_back(id);
    return ids;
  }

  // Stores `stats` under `domain_id`, merging with any existing entry.
  void save(int domain_id, const StyleStats& stats) {
    if (domain_id < 0) {
      throw ValueError("StyleBank::save: domain id must be non-negative");
    }
    if (stats.count == 0) {
      throw ValueError("StyleBank::save: stats carry a zero instance count");
    }
    if (!all_finite(stats.mean.data(), stats.mean.size()) ||
        !all_finite(stats.stddev.data(), stats.stddev.size())) {
      throw NumericError("StyleBank::save: stats contain NaN or Inf");
    }
    auto it = slots_.find(domain_id);
    if (it == slots_.end()) {
      slots_.emplace(domain_id, stats);
      return;
    }
    StyleStats& old = it->second;
    if (old.channels() != stats.channels()) {
      throw DimensionError(
          "StyleBank::save: domain " + std::to_string(domain_id) + " holds " +
          std::to_string(old.channels()) + "-channel stats, got " +
          std::to_string(stats.channels()));
    }
    const double n_old = static_cast<double>(old.count);
    const double n_new = static_cast<double>(stats.count);
    const double inv = 1.0 / (n_old + n_new);
    for (std::size_t c = 0; c < old.mean.size(); ++c) {
      old.mean[c] = (n_old * old.mean[c] + n_new * stats.mean[c]) * inv;
      old.stddev[c] = (n_old * old.stddev[c] + n_new * stats.stddev[c]) * inv;
    }
    old.count += stats.count;
  }

  // Returns the stored summary, or nothing if the slot is empty.
  std::optional<StyleStats> recall(int domain_id) const {
    auto it = slots_.find(domain_id);
    if (it == slots_.end()) return std::nullopt;
    return it->second;
  }

  void clear() { slots_.clear(); }

  bool operator==(const StyleBank& o) const { return slots_ == o.slots_; }

  // -------------------------------------------------------------------------
  // Binary serialization. Little-endian layout:
  //   magic "MSBK" | u32 version | u32 domain count
  //   per domain: u32 id | u32 channels | u64 count |
  //               f64 mean[channels] | f64 stddev[channels]
  // Writes go to a temporary file in the target directory followed by an
  // atomic rename, so a crash never leaves a truncated bank behind.
  // -------------------------------------------------------------------------

  void save_file(const std::string& path) const {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.parent_path().empty()
                             ? fs::path(target.string() + ".tmp")
                             : target.parent_path() /
                                   (target.filename().string() + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) {
        throw DataError("StyleBank: cannot open '" + tmp.string() +
                        "' for writing");
      }
      out.write(kMagic, 4);
      write_u32(out, kVersion);
      write_u32(out, static_cast<std::uint32_t>(slots_.size()));
      for (const auto& [id, s] : slots_) {
        write_u32(out, static_cast<std::uint32_t>(id));
        write_u32(out, static_cast<std::uint32_t>(s.channels()));
        write_u64(out, s.count);
        write_f64s(out, s.mean);
        write_f64s(out, s.stddev);
      }
      if (!out.good()) {
        throw DataError("StyleBank: write to '" + tmp.string() + "' failed");
      }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
      fs::remove(tmp);
      throw DataError("StyleBank: cannot move bank into place at '" + path +
                      "': " + ec.message());
    }
  }

  static StyleBank load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw DataError("StyleBank: cannot open '" + path + "'");
    }
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != kMagic) {
      throw DataError("StyleBank: '" + path + "' is not a style bank file");
    }
    const std::uint32_t version = read_u32(in, path);
    if (version != kVersion) {
      throw DataError("StyleBank: '" + path + "' has unsupported version " +
                      std::to_string(version));
    }
    const std::uint32_t count = read_u32(in, path);
    StyleBank bank;
    for (std::uint32_t i = 0; i < count; ++i) {
      const std::uint32_t id = read_u32(in, path);
      const std::uint32_t channels = read_u32(in, path);
      StyleStats s;
      s.count = read_u64(in, path);
      s.mean = read_f64s(in, channels, path);
      s.stddev = read_f64s(in, channels, path);
      if (bank.slots_.count(static_cast<int>(id))) {
        throw DataError("StyleBank: '" + path + "' repeats domain " +
                        std::to_string(id));
      }
      if (!all_finite(s.mean.data(), s.mean.size()) ||
          !all_finite(s.stddev.data(), s.stddev.size())) {
        throw DataError("StyleBank: '" + path + "' contains non-finite stats");
      }
      bank.slots_.emplace(static_cast<int>(id), std::move(s));
    }
    // Trailing bytes mean the file was not produced by this writer.
    in.peek();
    if (!in.eof()) {
      throw DataError("StyleBank: '" + path + "' has trailing data");
    }
    return bank;
  }

 private:
  static constexpr const char* kMagic = "MSBK";
  static constexpr std::uint32_t kVersion = 1;

  static void write_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
  }
  static void write_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  }
  static void write_f64s(std::ofstream& out, const std::vector<double>& v) {
    for (double d : v) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, 8);
      write_u64(out, bits);
    }
  }
  static std::uint32_t read_u32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DataError("StyleBank: '" + path + "' is truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  static std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw DataError("StyleBank: '" + path + "' is truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  static std::vector<double> read_f64s(std::ifstream& in, std::uint32_t n,
                                       const std::string& path) {
    std::vector<double> v(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      std::uint64_t bits = read_u64(in, path);
      std::memcpy(&v[i], &bits, 8);
    }
    return v;
  }

  std::map<int, StyleStats> slots_;
};

}  // namespace metastyle

#endif  // METASTYLE_STYLE_BANK_HPP_
