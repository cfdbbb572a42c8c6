// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_PLOT_HPP_
#define METASTYLE_PLOT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "metastyle/common.hpp"
#include "metastyle/logging.hpp"

namespace metastyle {

// One named line in a chart.
struct Series {
  std::string label;
  std::vector<double> x, y;
};

namespace internal {

inline const std::vector<cv::Scalar>& plot_palette() {
  static const std::vector<cv::Scalar> colors = {
      {180, 119, 31},  {14, 127, 255},  {44, 160, 44},  {40, 39, 214},
      {189, 103, 148}, {75, 86, 140},   {194, 119, 227}, {127, 127, 127},
  };
  return colors;
}

// Padded [lo, hi] range that stays valid for constant (and even empty) data.
inline void pad_range(double* lo, double* hi) {
  if (!std::isfinite(*lo) || !std::isfinite(*hi) || *lo > *hi) {
    *lo = 0.0;
    *hi = 1.0;
  }
  if (*hi - *lo < 1e-12) {
    const double pad = std::max(1.0, std::abs(*hi)) * 0.1;
    *lo -= pad;
    *hi += pad;
  } else {
    const double pad = (*hi - *lo) * 0.05;
    *lo -= pad;
    *hi += pad;
  }
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace internal

// Renders a multi-series line chart. Degenerate inputs (single point,
// constant values) render as flat lines rather than failing.
inline cv::Mat render_line_chart(const std::string& title,
                                 const std::string& x_label,
                                 const std::string& y_label,
                                 const std::vector<Series>& series,
                                 int width = 900, int height = 600) {
  if (series.empty()) throw ValueError("render_line_chart: no series");
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) {
      throw DimensionError("render_line_chart: series '" + s.label +
                           "' has mismatched x/y sizes");
    }
    if (s.x.empty()) {
      throw ValueError("render_line_chart: series '" + s.label + "' is empty");
    }
  }
  double x_lo = series[0].x[0], x_hi = x_lo;
  double y_lo = series[0].y[0], y_hi = y_lo;
  for (const auto& s : series) {
    for (double v : s.x) {
      x_lo = std::min(x_lo, v);
      x_hi = std::max(x_hi, v);
    }
    for (double v : s.y) {
      if (!std::isfinite(v)) {
        throw NumericError("render_line_chart: non-finite value in series '" +
                           s.label + "'");
      }
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
  }
  internal::pad_range(&x_lo, &x_hi);
  internal::pad_range(&y_lo, &y_hi);

  cv::Mat img(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  const int ml = 80, mr = 30, mt = 50, mb = 60;  // margins
  const cv::Rect area(ml, mt, width - ml - mr, height - mt - mb);
  const auto to_px = [&](double x, double y) {
    const double fx = (x - x_lo) / (x_hi - x_lo);
    const double fy = (y - y_lo) / (y_hi - y_lo);
    return cv::Point(area.x + static_cast<int>(fx * (area.width - 1)),
                     area.y + area.height - 1 -
                         static_cast<int>(fy * (area.height - 1)));
  };

  // Frame, ticks and grid.
  cv::rectangle(img, area, cv::Scalar(120, 120, 120), 1);
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double fx = static_cast<double>(t) / ticks;
    const double xv = x_lo + fx * (x_hi - x_lo);
    const double yv = y_lo + fx * (y_hi - y_lo);
    const cv::Point px = to_px(xv, y_lo);
    const cv::Point py = to_px(x_lo, yv);
    cv::line(img, {px.x, area.y}, {px.x, area.y + area.height - 1},
             cv::Scalar(235, 235, 235), 1);
    cv::line(img, {area.x, py.y}, {area.x + area.width - 1, py.y},
             cv::Scalar(235, 235, 235), 1);
    cv::putText(img, internal::tick_label(xv), {px.x - 18, height - mb + 20},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(60, 60, 60), 1,
                cv::LINE_AA);
    cv::putText(img, internal::tick_label(yv), {8, py.y + 4},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(60, 60, 60), 1,
                cv::LINE_AA);
  }
  cv::rectangle(img, area, cv::Scalar(120, 120, 120), 1);

  // Series polylines.
  const auto& palette = internal::plot_palette();
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const cv::Scalar color = palette[si % palette.size()];
    for (std::size_t i = 0; i + 1 < s.x.size(); ++i) {
      cv::line(img, to_px(s.x[i], s.y[i]), to_px(s.x[i + 1], s.y[i + 1]),
               color, 2, cv::LINE_AA);
    }
    if (s.x.size() == 1) {
      cv::circle(img, to_px(s.x[0], s.y[0]), 3, color, cv::FILLED);
    }
    // Legend entry.
    const int ly = mt + 18 + static_cast<int>(si) * 18;
    cv::line(img, {width - mr - 150, ly - 4}, {width - mr - 120, ly - 4},
             color, 2);
    cv::putText(img, s.label, {width - mr - 112, ly},
                cv::FONT_HERSHEY_SIMPLEX, 0.45, cv::Scalar(30, 30, 30), 1,
                cv::LINE_AA);
  }

  cv::putText(img, title, {ml, 30}, cv::FONT_HERSHEY_SIMPLEX, 0.7,
              cv::Scalar(20, 20, 20), 2, cv::LINE_AA);
  cv::putText(img, x_label, {width / 2 - 40, height - 15},
              cv::FONT_HERSHEY_SIMPLEX, 0.5, cv::Scalar(60, 60, 60), 1,
              cv::LINE_AA);
  cv::putText(img, y_label, {10, mt - 10}, cv::FONT_HERSHEY_SIMPLEX, 0.5,
              cv::Scalar(60, 60, 60), 1, cv::LINE_AA);
  return img;
}

// Renders a labeled bar chart (bars from 0 or from the minimum when values
// go negative).
inline cv::Mat render_bar_chart(const std::string& title,
                                const std::vector<std::string>& labels,
                                const std::vector<double>& values,
                                int width = 900, int height = 600) {
  if (labels.size() != values.size()) {
    throw DimensionError("render_bar_chart: label/value count mismatch");
  }
  if (labels.empty()) throw ValueError("render_bar_chart: no bars");
  double lo = 0.0, hi = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError("render_bar_chart: non-finite bar value");
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  internal::pad_range(&lo, &hi);

  cv::Mat img(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  const int ml = 80, mr = 30, mt = 50, mb = 80;
  const cv::Rect area(ml, mt, width - ml - mr, height - mt - mb);
  cv::rectangle(img, area, cv::Scalar(120, 120, 120), 1);
  const auto y_px = [&](double v) {
    const double f = (v - lo) / (hi - lo);
    return area.y + area.height - 1 - static_cast<int>(f * (area.height - 1));
  };
  const int ticks = 5;
  for (int t = 0; t <= ticks; ++t) {
    const double v = lo + (hi - lo) * t / ticks;
    cv::line(img, {area.x, y_px(v)}, {area.x + area.width - 1, y_px(v)},
             cv::Scalar(235, 235, 235), 1);
    cv::putText(img, internal::tick_label(v), {8, y_px(v) + 4},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(60, 60, 60), 1,
                cv::LINE_AA);
  }
  const int n = static_cast<int>(labels.size());
  const double slot = static_cast<double>(area.width) / n;
  const int bar_w = std::max(4, static_cast<int>(slot * 0.6));
  const auto& palette = internal::plot_palette();
  const int base_y = y_px(std::max(0.0, lo));
  for (int i = 0; i < n; ++i) {
    const int cx = area.x + static_cast<int>((i + 0.5) * slot);
    const int top = y_px(values[i]);
    const cv::Rect bar(cx - bar_w / 2, std::min(top, base_y), bar_w,
                       std::max(1, std::abs(base_y - top)));
    cv::rectangle(img, bar, palette[i % palette.size()], cv::FILLED);
    cv::putText(img, labels[i], {cx - bar_w / 2, height - mb + 24},
                cv::FONT_HERSHEY_SIMPLEX, 0.45, cv::Scalar(30, 30, 30), 1,
                cv::LINE_AA);
    char val[32];
    std::snprintf(val, sizeof(val), "%.3f", values[i]);
    cv::putText(img, val, {cx - bar_w / 2, std::min(top, base_y) - 6},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(60, 60, 60), 1,
                cv::LINE_AA);
  }
  cv::putText(img, title, {ml, 30}, cv::FONT_HERSHEY_SIMPLEX, 0.7,
              cv::Scalar(20, 20, 20), 2, cv::LINE_AA);
  return img;
}

inline void save_plot(const cv::Mat& img, const std::string& path) {
  if (!cv::imwrite(path, img)) {
    throw DataError("save_plot: cannot write '" + path + "'");
  }
}

// ---------------------------------------------------------------------------
// Standard report: consumes the documented CSV columns and emits loss curves,
// weight/style-shift trajectories, and a per-domain Dice bar chart.
// ---------------------------------------------------------------------------

inline std::vector<std::string> write_report_plots(
    const std::string& train_log_path, const std::string& fdrt_log_path,
    const std::string& eval_csv_path, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw DataError("write_report_plots: cannot create '" + out_dir +
                    "': " + ec.message());
  }

  const CsvTable train = read_csv(train_log_path);
  if (train.rows.empty()) {
    throw DataError("write_report_plots: train log '" + train_log_path +
                    "' has no data rows");
  }
  const int c_epoch = train.column("epoch");
  if (c_epoch < 0) {
    throw ParseError("write_report_plots: train log '" + train_log_path +
                     "' lacks an 'epoch' column");
  }

  // Mean of a column per epoch (rows are per-domain).
  const auto per_epoch_mean = [&](const std::string& col) {
    const int c = train.column(col);
    if (c < 0) {
      throw ParseError("write_report_plots: train log lacks column '" + col +
                       "'");
    }
    std::map<int, std::pair<double, int>> acc;
    for (std::size_t r = 0; r < train.rows.size(); ++r) {
      const int e = static_cast<int>(
          csv_to_double(train, r, c_epoch, train_log_path));
      auto& slot = acc[e];
      slot.first += csv_to_double(train, r, c, train_log_path);
      slot.second += 1;
    }
    Series s;
    s.label = col;
    for (const auto& [e, sum_count] : acc) {
      s.x.push_back(e);
      s.y.push_back(sum_count.first / sum_count.second);
    }
    return s;
  };

  std::vector<std::string> written;
  const auto emit = [&](const cv::Mat& img, const std::string& name) {
    const std::string path = (fs::path(out_dir) / name).string();
    save_plot(img, path);
    written.push_back(path);
  };

  emit(render_line_chart("training losses", "epoch", "loss",
                         {per_epoch_mean("l_total"), per_epoch_mean("l_dice"),
                          per_epoch_mean("l_align"),
                          per_epoch_mean("l_cons")}),
       "loss_curves.png");
  emit(render_line_chart("dynamic weight and style shift", "epoch", "value",
                         {per_epoch_mean("w"), per_epoch_mean("delta_style")}),
       "weight_trajectory.png");

  // Per-domain Dice bars: prefer the evaluation table, then the last
  // feedback round, then the final-epoch training Dice loss as 1 - loss.
  std::vector<std::string> labels;
  std::vector<double> values;
  std::string bar_title;
  if (!eval_csv_path.empty() && fs::exists(eval_csv_path)) {
    const CsvTable ev = read_csv(eval_csv_path);
    const int c_name = ev.column("name"), c_dice = ev.column("dice");
    if (c_name < 0 || c_dice < 0) {
      throw ParseError("write_report_plots: eval csv '" + eval_csv_path +
                       "' lacks name/dice columns");
    }
    for (std::size_t r = 0; r < ev.rows.size(); ++r) {
      labels.push_back(ev.rows[r][c_name]);
      values.push_back(csv_to_double(ev, r, c_dice, eval_csv_path));
    }
    bar_title = "held-out Dice per domain";
  } else if (!fdrt_log_path.empty() && fs::exists(fdrt_log_path)) {
    const CsvTable fl = read_csv(fdrt_log_path);
    const int c_round = fl.column("round"), c_dom = fl.column("domain"),
              c_dice = fl.column("dice");
    if (c_round < 0 || c_dom < 0 || c_dice < 0) {
      throw ParseError("write_report_plots: feedback log '" + fdrt_log_path +
                       "' lacks round/domain/dice columns");
    }
    int last = 0;
    for (std::size_t r = 0; r < fl.rows.size(); ++r) {
      last = std::max(last, static_cast<int>(csv_to_double(fl, r, c_round,
                                                           fdrt_log_path)));
    }
    for (std::size_t r = 0; r < fl.rows.size(); ++r) {
      if (static_cast<int>(csv_to_double(fl, r, c_round, fdrt_log_path)) !=
          last) {
        continue;
      }
      labels.push_back("domain " + fl.rows[r][c_dom]);
      values.push_back(csv_to_double(fl, r, c_dice, fdrt_log_path));
    }
    bar_title = "validation Dice per domain (last feedback round)";
  }
  if (labels.empty()) {
    // Fall back to the final training epoch's per-domain Dice loss.
    const int c_dom = train.column("domain"), c_ld = train.column("l_dice");
    if (c_dom < 0 || c_ld < 0) {
      throw ParseError("write_report_plots: train log lacks domain/l_dice");
    }
    int last = 0;
    for (std::size_t r = 0; r < train.rows.size(); ++r) {
      last = std::max(last, static_cast<int>(csv_to_double(train, r, c_epoch,
                                                           train_log_path)));
    }
    for (std::size_t r = 0; r < train.rows.size(); ++r) {
      if (static_cast<int>(csv_to_double(train, r, c_epoch,
                                         train_log_path)) != last) {
        continue;
      }
      labels.push_back("domain " + train.rows[r][c_dom]);
      values.push_back(1.0 -
                       csv_to_double(train, r, c_ld, train_log_path));
    }
    bar_title = "1 - training Dice loss per domain (final epoch)";
  }
  emit(render_bar_chart(bar_title, labels, values), "dice_bars.png");
  return written;
}

}  // namespace metastyle

#endif  // METASTYLE_PLOT_HPP_
