// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_NN_HPP_
#define METASTYLE_NN_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "metastyle/common.hpp"
#include "metastyle/style_stats.hpp"
#include "metastyle/tensor.hpp"

namespace metastyle {
namespace nn {

using MatRM =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using ConstMapRM = Eigen::Map<const MatRM>;

// ---------------------------------------------------------------------------
// 3x3 convolution, stride 1, zero padding 1 (spatial size preserved), via
// im2col + matrix product. Weights are stored [out][in][3][3] row-major, so
// the weight tensor maps directly onto an (out x in*9) matrix.
// ---------------------------------------------------------------------------

// Expands instance n of x into a (in*9 x H*W) row-major patch matrix.
inline void im2col3(const Tensor4& x, int n, std::vector<double>* buf) {
  const int h = x.h(), w = x.w(), cin = x.c();
  const std::size_t hw = x.plane();
  buf->assign(static_cast<std::size_t>(cin) * 9 * hw, 0.0);
  for (int c = 0; c < cin; ++c) {
    const double* src = x.channel(n, c);
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* row =
            buf->data() + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * hw;
        const int sy = ky - 1, sx = kx - 1;
        for (int y = 0; y < h; ++y) {
          const int yy = y + sy;
          if (yy < 0 || yy >= h) continue;
          const int x_lo = std::max(0, -sx);
          const int x_hi = std::min(w, w - sx);
          const double* s = src + static_cast<std::size_t>(yy) * w + sx;
          double* d = row + static_cast<std::size_t>(y) * w;
          for (int xx = x_lo; xx < x_hi; ++xx) d[xx] = s[xx];
        }
      }
    }
  }
}

// Scatter-adds a patch-matrix gradient back onto instance n of dx.
inline void col2im3(const std::vector<double>& buf, Tensor4* dx, int n) {
  const int h = dx->h(), w = dx->w(), cin = dx->c();
  const std::size_t hw = dx->plane();
  for (int c = 0; c < cin; ++c) {
    double* dst = dx->channel(n, c);
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* row =
            buf.data() + (static_cast<std::size_t>(c) * 9 + ky * 3 + kx) * hw;
        const int sy = ky - 1, sx = kx - 1;
        for (int y = 0; y < h; ++y) {
          const int yy = y + sy;
          if (yy < 0 || yy >= h) continue;
          const int x_lo = std::max(0, -sx);
          const int x_hi = std::min(w, w - sx);
          double* d = dst + static_cast<std::size_t>(yy) * w + sx;
          const double* s = row + static_cast<std::size_t>(y) * w;
          for (int xx = x_lo; xx < x_hi; ++xx) d[xx] += s[xx];
        }
      }
    }
  }
}

// y = W * im2col(x) + b. W is (out x in*9), b is (out).
inline void conv3_forward(const Tensor4& x, const std::vector<double>& w,
                          const std::vector<double>& b, Tensor4* y,
                          std::vector<double>* scratch) {
  const int cin = x.c(), cout = y->c();
  const std::size_t hw = x.plane();
  ConstMapRM wm(w.data(), cout, static_cast<Eigen::Index>(cin) * 9);
  for (int n = 0; n < x.n(); ++n) {
    im2col3(x, n, scratch);
    ConstMapRM col(scratch->data(), static_cast<Eigen::Index>(cin) * 9,
                   static_cast<Eigen::Index>(hw));
    MapRM out(y->instance(n), cout, static_cast<Eigen::Index>(hw));
    out.noalias() = wm * col;
    for (int c = 0; c < cout; ++c) out.row(c).array() += b[c];
  }
}

// Accumulates dW, db and (optionally) writes dx for a 3x3 convolution.
inline void conv3_backward(const Tensor4& x, const std::vector<double>& w,
                           const Tensor4& dy, std::vector<double>* dw,
                           std::vector<double>* db, Tensor4* dx,
                           std::vector<double>* scratch,
                           std::vector<double>* scratch2) {
  const int cin = x.c(), cout = dy.c();
  const std::size_t hw = x.plane();
  ConstMapRM wm(w.data(), cout, static_cast<Eigen::Index>(cin) * 9);
  MapRM dwm(dw->data(), cout, static_cast<Eigen::Index>(cin) * 9);
  if (dx) dx->fill(0.0);
  for (int n = 0; n < x.n(); ++n) {
    im2col3(x, n, scratch);
    ConstMapRM col(scratch->data(), static_cast<Eigen::Index>(cin) * 9,
                   static_cast<Eigen::Index>(hw));
    ConstMapRM dyl(dy.instance(n), cout, static_cast<Eigen::Index>(hw));
    dwm.noalias() += dyl * col.transpose();
    for (int c = 0; c < cout; ++c) (*db)[c] += dyl.row(c).sum();
    if (dx) {
      scratch2->assign(static_cast<std::size_t>(cin) * 9 * hw, 0.0);
      MapRM dcol(scratch2->data(), static_cast<Eigen::Index>(cin) * 9,
                 static_cast<Eigen::Index>(hw));
      dcol.noalias() = wm.transpose() * dyl;
      col2im3(*scratch2, dx, n);
    }
  }
}

// 1x1 convolution (pointwise linear map across channels).
inline void conv1_forward(const Tensor4& x, const std::vector<double>& w,
                          const std::vector<double>& b, Tensor4* y) {
  const int cin = x.c(), cout = y->c();
  const std::size_t hw = x.plane();
  ConstMapRM wm(w.data(), cout, cin);
  for (int n = 0; n < x.n(); ++n) {
    ConstMapRM in(x.instance(n), cin, static_cast<Eigen::Index>(hw));
    MapRM out(y->instance(n), cout, static_cast<Eigen::Index>(hw));
    out.noalias() = wm * in;
    for (int c = 0; c < cout; ++c) out.row(c).array() += b[c];
  }
}

inline void conv1_backward(const Tensor4& x, const std::vector<double>& w,
                           const Tensor4& dy, std::vector<double>* dw,
                           std::vector<double>* db, Tensor4* dx) {
  const int cin = x.c(), cout = dy.c();
  const std::size_t hw = x.plane();
  ConstMapRM wm(w.data(), cout, cin);
  MapRM dwm(dw->data(), cout, cin);
  if (dx) dx->fill(0.0);
  for (int n = 0; n < x.n(); ++n) {
    ConstMapRM in(x.instance(n), cin, static_cast<Eigen::Index>(hw));
    ConstMapRM dyl(dy.instance(n), cout, static_cast<Eigen::Index>(hw));
    dwm.noalias() += dyl * in.transpose();
    for (int c = 0; c < cout; ++c) (*db)[c] += dyl.row(c).sum();
    if (dx) {
      MapRM dxl(dx->instance(n), cin, static_cast<Eigen::Index>(hw));
      dxl.noalias() = wm.transpose() * dyl;
    }
  }
}

// ---------------------------------------------------------------------------
// Pointwise and spatial layers.
// ---------------------------------------------------------------------------

inline void relu_forward(Tensor4* x) {
  double* p = x->data();
  for (std::size_t i = 0; i < x->size(); ++i) {
    if (p[i] < 0.0) p[i] = 0.0;
  }
}

// dy is masked in place using the post-activation values (y > 0 <=> x > 0).
inline void relu_backward(const Tensor4& y, Tensor4* dy) {
  const double* a = y.data();
  double* g = dy->data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (a[i] <= 0.0) g[i] = 0.0;
  }
}

// 2x2 max pooling, stride 2. `argmax` records the winning offset within each
// instance-channel plane for the backward scatter.
inline void maxpool2_forward(const Tensor4& x, Tensor4* y,
                             std::vector<std::int32_t>* argmax) {
  const int h = x.h(), w = x.w(), oh = h / 2, ow = w / 2;
  argmax->assign(y->size(), 0);
  std::size_t k = 0;
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.channel(n, c);
      double* dst = y->channel(n, c);
      for (int yo = 0; yo < oh; ++yo) {
        for (int xo = 0; xo < ow; ++xo) {
          const int y0 = yo * 2, x0 = xo * 2;
          int best = y0 * w + x0;
          double bv = src[best];
          const int cand[3] = {y0 * w + x0 + 1, (y0 + 1) * w + x0,
                               (y0 + 1) * w + x0 + 1};
          for (int q : cand) {
            if (src[q] > bv) {
              bv = src[q];
              best = q;
            }
          }
          dst[yo * ow + xo] = bv;
          (*argmax)[k++] = best;
        }
      }
    }
  }
}

inline void maxpool2_backward(const Tensor4& dy,
                              const std::vector<std::int32_t>& argmax,
                              Tensor4* dx) {
  dx->fill(0.0);
  const int oh = dy.h(), ow = dy.w();
  std::size_t k = 0;
  for (int n = 0; n < dy.n(); ++n) {
    for (int c = 0; c < dy.c(); ++c) {
      const double* g = dy.channel(n, c);
      double* dst = dx->channel(n, c);
      for (int i = 0; i < oh * ow; ++i) {
        dst[argmax[k++]] += g[i];
      }
    }
  }
}

// Nearest-neighbor 2x upsampling.
inline void upsample2_forward(const Tensor4& x, Tensor4* y) {
  const int h = x.h(), w = x.w();
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.channel(n, c);
      double* dst = y->channel(n, c);
      for (int yy = 0; yy < h; ++yy) {
        for (int xx = 0; xx < w; ++xx) {
          const double v = src[yy * w + xx];
          double* d = dst + (yy * 2) * (w * 2) + xx * 2;
          d[0] = v;
          d[1] = v;
          d[w * 2] = v;
          d[w * 2 + 1] = v;
        }
      }
    }
  }
}

inline void upsample2_backward(const Tensor4& dy, Tensor4* dx) {
  const int h = dx->h(), w = dx->w();
  for (int n = 0; n < dy.n(); ++n) {
    for (int c = 0; c < dy.c(); ++c) {
      const double* g = dy.channel(n, c);
      double* dst = dx->channel(n, c);
      for (int yy = 0; yy < h; ++yy) {
        for (int xx = 0; xx < w; ++xx) {
          const double* s = g + (yy * 2) * (w * 2) + xx * 2;
          dst[yy * w + xx] = s[0] + s[1] + s[w * 2] + s[w * 2 + 1];
        }
      }
    }
  }
}

// Channel concatenation [a | b] and its inverse split for gradients.
inline void concat_forward(const Tensor4& a, const Tensor4& b, Tensor4* y) {
  const std::size_t pa = static_cast<std::size_t>(a.c()) * a.plane();
  const std::size_t pb = static_cast<std::size_t>(b.c()) * b.plane();
  for (int n = 0; n < a.n(); ++n) {
    std::copy(a.instance(n), a.instance(n) + pa, y->instance(n));
    std::copy(b.instance(n), b.instance(n) + pb, y->instance(n) + pa);
  }
}

inline void concat_backward(const Tensor4& dy, Tensor4* da, Tensor4* db) {
  const std::size_t pa = static_cast<std::size_t>(da->c()) * da->plane();
  const std::size_t pb = static_cast<std::size_t>(db->c()) * db->plane();
  for (int n = 0; n < dy.n(); ++n) {
    std::copy(dy.instance(n), dy.instance(n) + pa, da->instance(n));
    std::copy(dy.instance(n) + pa, dy.instance(n) + pa + pb,
              db->instance(n));
  }
}

// Per-pixel softmax across channels.
inline void softmax_forward(const Tensor4& logits, Tensor4* probs) {
  const int k = logits.c();
  const std::size_t hw = logits.plane();
  for (int n = 0; n < logits.n(); ++n) {
    for (std::size_t i = 0; i < hw; ++i) {
      double m = logits.channel(n, 0)[i];
      for (int c = 1; c < k; ++c) m = std::max(m, logits.channel(n, c)[i]);
      double sum = 0.0;
      for (int c = 0; c < k; ++c) {
        const double e = std::exp(logits.channel(n, c)[i] - m);
        probs->channel(n, c)[i] = e;
        sum += e;
      }
      const double inv = 1.0 / sum;
      for (int c = 0; c < k; ++c) probs->channel(n, c)[i] *= inv;
    }
  }
}

// d(loss)/d(logits) from d(loss)/d(probs): dl_c = p_c (dp_c - sum_j dp_j p_j).
inline void softmax_backward(const Tensor4& probs, const Tensor4& dprobs,
                             Tensor4* dlogits) {
  const int k = probs.c();
  const std::size_t hw = probs.plane();
  for (int n = 0; n < probs.n(); ++n) {
    for (std::size_t i = 0; i < hw; ++i) {
      double dot = 0.0;
      for (int c = 0; c < k; ++c) {
        dot += dprobs.channel(n, c)[i] * probs.channel(n, c)[i];
      }
      for (int c = 0; c < k; ++c) {
        dlogits->channel(n, c)[i] =
            probs.channel(n, c)[i] * (dprobs.channel(n, c)[i] - dot);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Style-recall layer: the feature-space counterpart of recall_normalize with
// a full backward pass. The override statistics are treated as constants
// (they are mixed outside the differentiated graph); the instance statistics
// are differentiated exactly.
// ---------------------------------------------------------------------------

struct RecallTrace {
  // Per (instance, channel) statistics of the layer input.
  std::vector<double> mu, sigma;
};

inline Tensor4 recall_forward(const Tensor4& x, const StyleStats& mixed,
                              const StyleRecallConfig& cfg,
                              RecallTrace* trace) {
  if (mixed.channels() != x.c()) {
    throw DimensionError("recall_forward: stats/channel mismatch");
  }
  Tensor4 out(x.n(), x.c(), x.h(), x.w());
  const std::size_t hw = x.plane();
  trace->mu.assign(static_cast<std::size_t>(x.n()) * x.c(), 0.0);
  trace->sigma.assign(static_cast<std::size_t>(x.n()) * x.c(), 0.0);
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      double mu, sd;
      instance_channel_stats(x, n, c, &mu, &sd);
      trace->mu[static_cast<std::size_t>(n) * x.c() + c] = mu;
      trace->sigma[static_cast<std::size_t>(n) * x.c() + c] = sd;
      const double scale = mixed.stddev[c] / (sd + cfg.epsilon);
      const double* src = x.channel(n, c);
      double* dst = out.channel(n, c);
      for (std::size_t i = 0; i < hw; ++i) {
        dst[i] = (src[i] - mu) * scale + mixed.mean[c];
      }
    }
  }
  return out;
}

// Exact gradient through the instance statistics:
//   y_i = a (x_i - mu) + mu_mix,  a = sigma_mix / (sigma + eps)
//   dx_j = a (g_j - mean(g)) - sigma_mix / (sigma+eps)^2 * dsigma_j * S
// with dsigma_j = (x_j - mu) / (M sigma) and S = sum_i g_i (x_i - mu).
inline Tensor4 recall_backward(const Tensor4& x, const StyleStats& mixed,
                               const StyleRecallConfig& cfg,
                               const RecallTrace& trace, const Tensor4& dy) {
  Tensor4 dx(x.n(), x.c(), x.h(), x.w());
  const std::size_t hw = x.plane();
  const double m = static_cast<double>(hw);
  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const double mu = trace.mu[static_cast<std::size_t>(n) * x.c() + c];
      const double sd = trace.sigma[static_cast<std::size_t>(n) * x.c() + c];
      const double denom = sd + cfg.epsilon;
      const double a = mixed.stddev[c] / denom;
      const double* src = x.channel(n, c);
      const double* g = dy.channel(n, c);
      double* out = dx.channel(n, c);
      double g_sum = 0.0, s = 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        g_sum += g[i];
        s += g[i] * (src[i] - mu);
      }
      const double g_mean = g_sum / m;
      // Constant channels have sigma = 0: the statistics term vanishes
      // because every (x_i - mu) is zero.
      const double stat_coeff =
          sd > 0.0 ? mixed.stddev[c] / (denom * denom) * s / (m * sd) : 0.0;
      for (std::size_t i = 0; i < hw; ++i) {
        out[i] = a * (g[i] - g_mean) - stat_coeff * (src[i] - mu);
      }
    }
  }
  return dx;
}

}  // namespace nn
}  // namespace metastyle

#endif  // METASTYLE_NN_HPP_
