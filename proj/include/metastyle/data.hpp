// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_DATA_HPP_
#define METASTYLE_DATA_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "metastyle/common.hpp"
#include "metastyle/dataset.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {

// Rendering style of a synthetic domain. Geometry is controlled separately
// (by the seed), so two domains with the same seed and different styles share
// identical masks — domain shift is purely stylistic.
struct StyleParams {
  // Mean gray level the image is built around.
  double base_intensity = 0.4;
  // Foreground/background separation; negative values render foreground
  // darker than background.
  double contrast = 0.4;
  // Additive Gaussian pixel noise.
  double noise_sigma = 0.02;
  // Cycles per image width of the sinusoidal texture; 0 disables texture.
  double texture_freq = 0.0;
  // Texture amplitude.
  double texture_amp = 0.06;

  void validate() const {
    if (!(base_intensity >= 0.0 && base_intensity <= 1.0)) {
      throw ConfigError("StyleParams: base_intensity must lie in [0,1]");
    }
    if (!(contrast >= -1.0 && contrast <= 1.0)) {
      throw ConfigError("StyleParams: contrast must lie in [-1,1]");
    }
    if (!(noise_sigma >= 0.0)) {
      throw ConfigError("StyleParams: noise_sigma must be non-negative");
    }
    if (!(texture_freq >= 0.0)) {
      throw ConfigError("StyleParams: texture_freq must be non-negative");
    }
    if (!(texture_amp >= 0.0)) {
      throw ConfigError("StyleParams: texture_amp must be non-negative");
    }
  }
};

namespace internal {

struct Ellipse {
  double cy, cx;     // center, pixels
  double ry, rx;     // semi-axes, pixels
  double angle;      // radians
  int label;         // mask value
};

inline bool inside(const Ellipse& e, double y, double x) {
  const double dy = y - e.cy;
  const double dx = x - e.cx;
  const double ca = std::cos(e.angle), sa = std::sin(e.angle);
  const double u = dx * ca + dy * sa;
  const double v = -dx * sa + dy * ca;
  return (u * u) / (e.rx * e.rx) + (v * v) / (e.ry * e.ry) <= 1.0;
}

// Draws the elliptical "anatomy" of one image. For K = 2, 1-3 foreground
// ellipses all labeled 1; for K >= 3, K-1 organs anchored in distinct image
// regions so every class is usually present.
inline std::vector<Ellipse> sample_geometry(Rng& geo, int hw, int classes) {
  std::vector<Ellipse> out;
  const double size = static_cast<double>(hw);
  if (classes <= 2) {
    const int count = 1 + static_cast<int>(geo.below(3));
    for (int i = 0; i < count; ++i) {
      Ellipse e;
      e.cy = geo.uniform(0.2, 0.8) * size;
      e.cx = geo.uniform(0.2, 0.8) * size;
      e.ry = geo.uniform(0.10, 0.22) * size;
      e.rx = geo.uniform(0.10, 0.22) * size;
      e.angle = geo.uniform(0.0, 3.141592653589793);
      e.label = 1;
      out.push_back(e);
    }
    return out;
  }
  // Multi-organ preset: one organ per foreground class, anchored on a ring.
  const int organs = classes - 1;
  for (int i = 0; i < organs; ++i) {
    const double theta = 2.0 * 3.141592653589793 *
                         (static_cast<double>(i) + geo.uniform(-0.15, 0.15)) /
                         organs;
    const double rad = geo.uniform(0.18, 0.30) * size;
    Ellipse e;
    e.cy = 0.5 * size + rad * std::sin(theta);
    e.cx = 0.5 * size + rad * std::cos(theta);
    e.ry = geo.uniform(0.07, 0.14) * size;
    e.rx = geo.uniform(0.07, 0.14) * size;
    e.angle = geo.uniform(0.0, 3.141592653589793);
    e.label = i + 1;
    out.push_back(e);
  }
  return out;
}

// Gray level of a mask label under a style: background sits half a contrast
// below base, foreground classes step upward from base. (Clamping to [0,1]
// happens after texture and noise.)
inline double style_level(const StyleParams& s, int label, int classes) {
  if (label == 0) return s.base_intensity - 0.5 * s.contrast;
  if (classes <= 2) return s.base_intensity + 0.5 * s.contrast;
  const double step =
      0.2 + 0.6 * static_cast<double>(label - 1) /
                static_cast<double>(std::max(1, classes - 2));
  return s.base_intensity + s.contrast * step;
}

}  // namespace internal

// Generates a synthetic domain of n images. The same (seed, n, hw, classes)
// always produces the same geometry and the same noise draws; the style only
// affects how that geometry is rendered, so masks are style-invariant.
inline DomainDataset make_synthetic_domain(const StyleParams& style, int n,
                                           std::uint64_t seed, int hw = 64,
                                           int classes = 2,
                                           int domain_id = 0,
                                           const std::string& name = "synthetic") {
  style.validate();
  if (n < 1) throw ConfigError("make_synthetic_domain: n must be >= 1");
  if (hw < 8) throw ConfigError("make_synthetic_domain: image size too small");
  if (classes < 2 || classes > 255) {
    throw ConfigError("make_synthetic_domain: classes must lie in [2, 255]");
  }
  DomainDataset ds;
  ds.domain_id = domain_id;
  ds.name = name;
  ds.num_classes = classes;
  ds.images = Tensor4(n, 1, hw, hw);
  ds.masks = MaskBatch(n, hw, hw);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    Rng geo(derive_seed(seed, Stream::kGeometry, i));
    Rng pix(derive_seed(seed, Stream::kPixelNoise, i));
    const auto ellipses =
        internal::sample_geometry(geo, hw, classes);
    // Texture orientation and phase belong to the noise stream so masks stay
    // untouched by style.
    const double tex_angle = pix.uniform(0.0, 3.141592653589793);
    const double tex_phase = pix.uniform(0.0, 6.283185307179586);
    const double ca = std::cos(tex_angle), sa = std::sin(tex_angle);
    std::uint8_t* mask = ds.masks.instance(static_cast<int>(i));
    double* img = ds.images.instance(static_cast<int>(i));
    for (int y = 0; y < hw; ++y) {
      for (int x = 0; x < hw; ++x) {
        int label = 0;
        for (const auto& e : ellipses) {
          if (internal::inside(e, y + 0.5, x + 0.5)) label = e.label;
        }
        mask[y * hw + x] = static_cast<std::uint8_t>(label);
        double v = internal::style_level(style, label, classes);
        if (style.texture_freq > 0.0) {
          const double t = 6.283185307179586 * style.texture_freq *
                               (x * ca + y * sa) / hw +
                           tex_phase;
          v += style.texture_amp * std::sin(t);
        }
        // The noise draw is consumed unconditionally so the stream position
        // (and with it the geometry of later pixels) is style-independent.
        const double noise = pix.normal();
        v += style.noise_sigma * noise;
        img[y * hw + x] = clamp01(v);
      }
    }
  });
  return ds;
}

// ---------------------------------------------------------------------------
// Dataset directory I/O.
//
// Layout:   <dir>/images/NNNN.png   16-bit grayscale PNG, intensity * 65535
//           <dir>/masks/NNNN.png    8-bit PNG storing raw label values
//           <dir>/manifest          one "image<TAB>mask" relative pair per line
//           <dir>/meta              "key=value" lines (domain_id, name, ...)
// ---------------------------------------------------------------------------

inline void write_dataset_dir(const DomainDataset& ds, const std::string& dir,
                              const std::map<std::string, std::string>&
                                  extra_meta = {}) {
  namespace fs = std::filesystem;
  ds.validate("write_dataset_dir");
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "images", ec);
  fs::create_directories(fs::path(dir) / "masks", ec);
  if (ec) {
    throw DataError("write_dataset_dir: cannot create '" + dir +
                    "': " + ec.message());
  }
  std::ofstream manifest(fs::path(dir) / "manifest");
  if (!manifest) {
    throw DataError("write_dataset_dir: cannot write manifest in '" + dir +
                    "'");
  }
  const int hw_h = ds.images.h(), hw_w = ds.images.w();
  for (int i = 0; i < ds.size(); ++i) {
    char base[16];
    std::snprintf(base, sizeof(base), "%04d.png", i);
    const std::string img_rel = std::string("images/") + base;
    const std::string mask_rel = std::string("masks/") + base;
    cv::Mat img(hw_h, hw_w, CV_16UC1);
    const double* src = ds.images.instance(i);
    for (int y = 0; y < hw_h; ++y) {
      for (int x = 0; x < hw_w; ++x) {
        img.at<std::uint16_t>(y, x) = static_cast<std::uint16_t>(
            std::llround(src[y * hw_w + x] * 65535.0));
      }
    }
    cv::Mat mask(hw_h, hw_w, CV_8UC1);
    const std::uint8_t* msrc = ds.masks.instance(i);
    for (int y = 0; y < hw_h; ++y) {
      for (int x = 0; x < hw_w; ++x) {
        mask.at<std::uint8_t>(y, x) = msrc[y * hw_w + x];
      }
    }
    if (!cv::imwrite((fs::path(dir) / img_rel).string(), img) ||
        !cv::imwrite((fs::path(dir) / mask_rel).string(), mask)) {
      throw DataError("write_dataset_dir: PNG write failed in '" + dir + "'");
    }
    manifest << img_rel << '\t' << mask_rel << '\n';
  }
  if (!manifest.good()) {
    throw DataError("write_dataset_dir: manifest write failed in '" + dir +
                    "'");
  }
  manifest.close();
  std::ofstream meta(fs::path(dir) / "meta");
  meta << "domain_id=" << ds.domain_id << '\n';
  meta << "name=" << ds.name << '\n';
  meta << "num_classes=" << ds.num_classes << '\n';
  meta << "intensity_scale=65535\n";
  for (const auto& [k, v] : extra_meta) meta << k << '=' << v << '\n';
  if (!meta.good()) {
    throw DataError("write_dataset_dir: meta write failed in '" + dir + "'");
  }
}

inline std::map<std::string, std::string> read_meta_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_meta_file: cannot open '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// Loads a dataset directory produced by write_dataset_dir (or any directory
// following the same manifest layout). Directories written by this library
// declare `intensity_scale` in their meta file and are divided by that fixed
// scale, preserving the stored intensity levels exactly (up to raster
// quantization). External data without the key is min-max scaled to [0, 1]
// per image; a constant image scales to all zeros.
inline DomainDataset load_dataset_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  if (!fs::exists(root / "manifest")) {
    throw DataError("load_dataset_dir: no manifest in '" + dir + "'");
  }
  DomainDataset ds;
  int expected_classes = -1;
  double intensity_scale = 0.0;  // 0 = unknown, use per-image min-max
  if (fs::exists(root / "meta")) {
    const auto kv = read_meta_file((root / "meta").string());
    if (auto it = kv.find("domain_id"); it != kv.end()) {
      ds.domain_id = std::stoi(it->second);
    }
    if (auto it = kv.find("name"); it != kv.end()) ds.name = it->second;
    if (auto it = kv.find("num_classes"); it != kv.end()) {
      expected_classes = std::stoi(it->second);
    }
    if (auto it = kv.find("intensity_scale"); it != kv.end()) {
      intensity_scale = std::stod(it->second);
      if (!(intensity_scale > 0.0)) {
        throw DataError("load_dataset_dir: bad intensity_scale in '" + dir +
                        "'");
      }
    }
  }
  if (ds.name.empty()) ds.name = root.filename().string();

  std::ifstream manifest(root / "manifest");
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError((root / "manifest").string() + ":" +
                       std::to_string(line_no) +
                       ": expected image<TAB>mask");
    }
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  if (pairs.empty()) {
    throw DataError("load_dataset_dir: manifest in '" + dir + "' is empty");
  }

  ds.images = Tensor4();  // sized after the first image is read
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string img_path = (root / pairs[i].first).string();
    const std::string mask_path = (root / pairs[i].second).string();
    cv::Mat img = cv::imread(img_path, cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
    if (img.empty()) {
      throw DataError("load_dataset_dir: cannot read image '" + img_path +
                      "'");
    }
    cv::Mat mask = cv::imread(mask_path, cv::IMREAD_GRAYSCALE);
    if (mask.empty()) {
      throw DataError("load_dataset_dir: cannot read mask '" + mask_path +
                      "'");
    }
    if (img.rows != mask.rows || img.cols != mask.cols) {
      throw DataError("load_dataset_dir: image/mask shape mismatch for pair '" +
                      pairs[i].first + "' / '" + pairs[i].second + "'");
    }
    if (i == 0) {
      ds.images = Tensor4(static_cast<int>(pairs.size()), 1, img.rows,
                          img.cols);
      ds.masks = MaskBatch(static_cast<int>(pairs.size()), img.rows, img.cols);
    } else if (img.rows != ds.images.h() || img.cols != ds.images.w()) {
      throw DataError("load_dataset_dir: image '" + img_path +
                      "' disagrees with dataset shape");
    }
    cv::Mat img64;
    img.convertTo(img64, CV_64FC1);
    double lo = 0.0, scale = 0.0;
    if (intensity_scale > 0.0) {
      scale = 1.0 / intensity_scale;
    } else {
      double hi;
      cv::minMaxLoc(img64, &lo, &hi);
      scale = hi > lo ? 1.0 / (hi - lo) : 0.0;
    }
    double* dst = ds.images.instance(static_cast<int>(i));
    for (int y = 0; y < img.rows; ++y) {
      for (int x = 0; x < img.cols; ++x) {
        dst[y * img.cols + x] =
            std::min(1.0, std::max(0.0, (img64.at<double>(y, x) - lo) * scale));
      }
    }
    std::uint8_t* mdst = ds.masks.instance(static_cast<int>(i));
    for (int y = 0; y < mask.rows; ++y) {
      for (int x = 0; x < mask.cols; ++x) {
        mdst[y * mask.cols + x] = mask.at<std::uint8_t>(y, x);
      }
    }
  }
  const int observed = ds.masks.max_label_plus_one();
  ds.num_classes = expected_classes > 0 ? expected_classes
                                        : std::max(2, observed);
  if (observed > ds.num_classes) {
    throw DataError("load_dataset_dir: mask labels exceed num_classes=" +
                    std::to_string(ds.num_classes) + " in '" + dir + "'");
  }
  ds.validate("load_dataset_dir");
  return ds;
}

// ---------------------------------------------------------------------------
// Shipped benchmark scenarios: one source domain plus three target styles
// sharing the source anatomy distribution (but not its exact geometry seed),
// each with train/val/test splits that regenerate bit-identically from the
// master seed.
// ---------------------------------------------------------------------------

struct ScenarioCounts {
  int n_train = 200;
  int n_val = 50;
  int n_test = 50;
};

struct ScenarioDomain {
  std::string name;
  StyleParams style;
  DomainDataset train, val, test;
};

struct Scenario {
  std::string name;
  int num_classes = 2;
  int image_size = 64;
  // domains[0] is the source; the rest are held-out targets.
  std::vector<ScenarioDomain> domains;
};

inline std::vector<std::pair<std::string, StyleParams>> scenario_styles(
    const std::string& scenario) {
  std::vector<std::pair<std::string, StyleParams>> styles;
  if (scenario == "brats-like") {
    styles.push_back({"source", {0.35, 0.40, 0.02, 0.0, 0.06}});
    styles.push_back({"inverted", {0.65, -0.40, 0.02, 0.0, 0.06}});
    styles.push_back({"faint-noisy", {0.45, 0.16, 0.08, 0.0, 0.06}});
    styles.push_back({"textured", {0.30, 0.30, 0.03, 6.0, 0.10}});
  } else if (scenario == "abdominal-like") {
    styles.push_back({"source", {0.40, 0.45, 0.02, 0.0, 0.06}});
    styles.push_back({"inverted", {0.62, -0.45, 0.02, 0.0, 0.06}});
    styles.push_back({"faint-noisy", {0.50, 0.18, 0.08, 0.0, 0.06}});
    styles.push_back({"textured", {0.35, 0.35, 0.03, 7.0, 0.10}});
  } else {
    throw ConfigError("unknown scenario '" + scenario +
                      "' (expected brats-like or abdominal-like)");
  }
  return styles;
}

inline Scenario generate_scenario(const std::string& scenario,
                                  std::uint64_t master_seed,
                                  const ScenarioCounts& counts = {},
                                  int image_size = 64) {
  if (counts.n_train < 1 || counts.n_val < 1 || counts.n_test < 1) {
    throw ConfigError("generate_scenario: all split sizes must be >= 1");
  }
  Scenario out;
  out.name = scenario;
  out.image_size = image_size;
  out.num_classes = scenario == "abdominal-like" ? 5 : 2;
  const auto styles = scenario_styles(scenario);
  // One geometry seed per split, shared by every domain: the targets show
  // the same kind of anatomy in a different style.
  const std::uint64_t seed_train = derive_seed(master_seed, Stream::kGeometry, 1);
  const std::uint64_t seed_val = derive_seed(master_seed, Stream::kGeometry, 2);
  const std::uint64_t seed_test = derive_seed(master_seed, Stream::kGeometry, 3);
  for (std::size_t d = 0; d < styles.size(); ++d) {
    ScenarioDomain dom;
    dom.name = styles[d].first;
    dom.style = styles[d].second;
    const int id = static_cast<int>(d);
    dom.train = make_synthetic_domain(dom.style, counts.n_train, seed_train,
                                      image_size, out.num_classes, id,
                                      styles[d].first + "-train");
    dom.val = make_synthetic_domain(dom.style, counts.n_val, seed_val,
                                    image_size, out.num_classes, id,
                                    styles[d].first + "-val");
    dom.test = make_synthetic_domain(dom.style, counts.n_test, seed_test,
                                     image_size, out.num_classes, id,
                                     styles[d].first + "-test");
    out.domains.push_back(std::move(dom));
  }
  return out;
}

}  // namespace metastyle

#endif  // METASTYLE_DATA_HPP_
