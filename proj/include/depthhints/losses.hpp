#pragma once

#include "depthhints/core.hpp"
#include "depthhints/photometric.hpp"

namespace depthhints {

/// Result of the hint-gated objective.
struct GatedLoss {
  LossField loss;
  /// 1 where the hint branch was taken (hint valid and l_r(h) < l_r(d)).
  Mask gate;
  Mask hint_valid;
};

/// log(1 + |d - d_ref|); +infinity where either map is invalid.
LossField log_l1(const DisparityMap& d, const DisparityMap& d_ref);

/// Reverse Huber value of a residual for a given knee. delta == 0 yields 0
/// for a zero residual.
double berhu_value(double residual, double delta);

/// berHu with delta = 0.2 * max |d - d_ref| over jointly-valid pixels.
LossField berhu(const DepthMap& d, const DepthMap& d_ref);

/// Proxy-supervised loss: log-L1 against the hint, holes unsupervised.
LossField proxy_supervised_loss(const DisparityMap& d, const DisparityMap& hint);

/// Photometric plus log-L1 against the hint; holes in the hint add nothing.
LossField sum_loss(const LossField& photometric, const DisparityMap& d, const DisparityMap& hint);

/// Hint gating from precomputed photometric losses of the prediction and of
/// the hint. The gate is strict: ties keep the prediction.
GatedLoss gate_losses(const LossField& loss_pred, const LossField& loss_hint, const DisparityMap& d,
                      const DisparityMap& hint);

/// Computes l_r(d) and l_r(h) with photometric_loss_of_disparity and gates.
GatedLoss hint_gated_loss(const Image& ref, const Image& other, const DisparityMap& d, const DisparityMap& hint,
                          int direction = -1, double alpha = kDefaultAlpha);

/// Gate-true pixels over hint-valid pixels; 0 when there are no hints.
double hint_usage_fraction(const GatedLoss& g);

/// Mean over finite pixels; throws ValueError when none are finite.
double reduce_mean(const LossField& field);

}  // namespace depthhints
