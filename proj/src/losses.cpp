#include "depthhints/losses.hpp"

#include <cmath>
#include <limits>

namespace depthhints {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool usable(const DisparityMap& d, std::size_t i) { return d.valid[i] && std::isfinite(d.disp[i]); }

void require_same(const DisparityMap& a, const DisparityMap& b, const char* what) {
  if (!a.disp.same_shape(b.disp)) throw ValueError(std::string(what) + ": disparity maps differ in size");
}

}  // namespace

LossField log_l1(const DisparityMap& d, const DisparityMap& d_ref) {
  require_same(d, d_ref, "log_l1");
  LossField out(d.width(), d.height(), kInf);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (usable(d, i) && usable(d_ref, i)) out[i] = std::log1p(std::abs(d.disp[i] - d_ref.disp[i]));
  return out;
}

double berhu_value(double residual, double delta) {
  const double r = std::abs(residual);
  if (r <= delta) return r;
  return (r * r + delta * delta) / (2.0 * delta);
}

LossField berhu(const DepthMap& d, const DepthMap& d_ref) {
  if (!d.depth.same_shape(d_ref.depth)) throw ValueError("berhu: depth maps differ in size");
  auto joint = [&](std::size_t i) {
    return d.valid[i] && d_ref.valid[i] && std::isfinite(d.depth[i]) && std::isfinite(d_ref.depth[i]);
  };

  double max_residual = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < d.depth.size(); ++i) {
    if (!joint(i)) continue;
    any = true;
    max_residual = std::max(max_residual, std::abs(d.depth[i] - d_ref.depth[i]));
  }
  if (!any) throw ValueError("berhu: no jointly-valid pixels");

  const double delta = 0.2 * max_residual;
  LossField out(d.width(), d.height(), kInf);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (joint(i)) out[i] = berhu_value(d.depth[i] - d_ref.depth[i], delta);
  return out;
}

LossField proxy_supervised_loss(const DisparityMap& d, const DisparityMap& hint) { return log_l1(d, hint); }

LossField sum_loss(const LossField& photometric, const DisparityMap& d, const DisparityMap& hint) {
  require_same(d, hint, "sum_loss");
  if (!photometric.same_shape(d.disp)) throw ValueError("sum_loss: loss field and disparity differ in size");
  LossField out = photometric;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (usable(d, i) && usable(hint, i)) out[i] += std::log1p(std::abs(d.disp[i] - hint.disp[i]));
  return out;
}

GatedLoss gate_losses(const LossField& loss_pred, const LossField& loss_hint, const DisparityMap& d,
                      const DisparityMap& hint) {
  require_same(d, hint, "hint gating");
  if (!loss_pred.same_shape(d.disp) || !loss_hint.same_shape(d.disp))
    throw ValueError("hint gating: loss fields and disparities differ in size");

  GatedLoss g{loss_pred, Mask(d.width(), d.height(), 0), Mask(d.width(), d.height(), 0)};
  for (std::size_t i = 0; i < g.loss.size(); ++i) {
    if (!usable(hint, i)) continue;
    g.hint_valid[i] = 1;
    if (loss_hint[i] < loss_pred[i]) {
      g.gate[i] = 1;
      g.loss[i] += std::log1p(std::abs(d.disp[i] - hint.disp[i]));
    }
  }
  return g;
}

GatedLoss hint_gated_loss(const Image& ref, const Image& other, const DisparityMap& d, const DisparityMap& hint,
                          int direction, double alpha) {
  require_same(d, hint, "hint_gated_loss");
  return gate_losses(photometric_loss_of_disparity(ref, other, d, direction, alpha),
                     photometric_loss_of_disparity(ref, other, hint, direction, alpha), d, hint);
}

double hint_usage_fraction(const GatedLoss& g) {
  std::size_t valid = 0, used = 0;
  for (std::size_t i = 0; i < g.hint_valid.size(); ++i) {
    valid += g.hint_valid[i] != 0;
    used += g.gate[i] != 0;
  }
  return valid == 0 ? 0.0 : static_cast<double>(used) / static_cast<double>(valid);
}

double reduce_mean(const LossField& field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : field.data())
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  if (n == 0) throw ValueError("reduce_mean: no finite loss values");
  return sum / static_cast<double>(n);
}

}  // namespace depthhints
