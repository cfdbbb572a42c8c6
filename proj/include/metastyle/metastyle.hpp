// Copyright 2026 The MetaStyle Authors
// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header: pulls in the whole library.

#ifndef METASTYLE_METASTYLE_HPP_
#define METASTYLE_METASTYLE_HPP_

#include "metastyle/augmentation.hpp"
#include "metastyle/backbone.hpp"
#include "metastyle/common.hpp"
#include "metastyle/config.hpp"
#include "metastyle/data.hpp"
#include "metastyle/dataset.hpp"
#include "metastyle/fdrt.hpp"
#include "metastyle/logging.hpp"
#include "metastyle/losses.hpp"
#include "metastyle/meta_loop.hpp"
#include "metastyle/metrics.hpp"
#include "metastyle/nn.hpp"
#include "metastyle/optim.hpp"
#include "metastyle/plot.hpp"
#include "metastyle/style_bank.hpp"
#include "metastyle/style_stats.hpp"
#include "metastyle/tensor.hpp"
#include "metastyle/train_runner.hpp"

#endif  // METASTYLE_METASTYLE_HPP_
