// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef METASTYLE_OPTIM_HPP_
#define METASTYLE_OPTIM_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "metastyle/backbone.hpp"
#include "metastyle/common.hpp"

namespace metastyle {

// Step-decayed learning rate: base * factor^floor(epoch / every). With the
// default factor 0.5 the value is exact in floating point (powers of two).
inline double decayed_lr(double base, int epoch, double factor = 0.5,
                         int every = 20) {
  if (epoch < 0) throw ValueError("decayed_lr: epoch must be non-negative");
  if (every < 1) throw ConfigError("decayed_lr: decay interval must be >= 1");
  if (!(factor > 0.0 && factor <= 1.0)) {
    throw ConfigError("decayed_lr: factor must lie in (0, 1]");
  }
  return base * std::pow(factor, static_cast<double>(epoch / every));
}

// Adam with bias correction. State arrays mirror the model's parameter
// layout; the same instance must be reused across steps of one run.
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(SegModel* model, const Gradients& grads, double lr) {
    model->check_grads(grads);
    auto& params = model->params();
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i].assign(params[i].size(), 0.0);
        v_[i].assign(params[i].size(), 0.0);
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      double* p = params[i].v.data();
      const double* g = grads.g[i].data();
      double* m = m_[i].data();
      double* v = v_[i].data();
      for (std::size_t j = 0; j < params[i].size(); ++j) {
        m[j] = beta1_ * m[j] + (1.0 - beta1_) * g[j];
        v[j] = beta2_ * v[j] + (1.0 - beta2_) * g[j] * g[j];
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        p[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// The two optimizer families used by the training paths.
enum class OptimizerKind { kSgd, kAdam };

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

}  // namespace metastyle

#endif  // METASTYLE_OPTIM_HPP_
