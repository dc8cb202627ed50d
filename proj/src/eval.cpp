#include "depthhints/eval.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace depthhints::eval {

namespace {

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double upper = v[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + n / 2);
  return 0.5 * (lower + upper);
}

}  // namespace

void EvalConfig::validate() const {
  if (!(min_depth > 0.0 && min_depth < max_depth)) throw ValueError("eval: need 0 < min_depth < max_depth");
}

Rect garg_crop(int width, int height) {
  if (width <= 0 || height <= 0) throw ValueError("garg_crop: dimensions must be positive");
  return Rect{static_cast<int>(0.03594771 * width), static_cast<int>(0.40810811 * height),
              static_cast<int>(0.96405229 * width), static_cast<int>(0.99189189 * height)};
}

DepthMetrics compute_metrics(const DepthMap& pred, const DepthMap& gt, const EvalConfig& cfg) {
  cfg.validate();
  if (!pred.depth.same_shape(gt.depth)) throw ValueError("compute_metrics: prediction and ground truth differ in size");
  const Rect region = cfg.crop.value_or(Rect{0, 0, gt.width(), gt.height()});
  if (!region.fits(gt.width(), gt.height())) throw ValueError("compute_metrics: crop outside the image");

  std::vector<double> p, g;
  for (int y = region.y0; y < region.y1; ++y)
    for (int x = region.x0; x < region.x1; ++x) {
      if (!pred.is_valid(x, y) || !gt.is_valid(x, y)) continue;
      const double pv = pred.depth(x, y);
      const double gv = gt.depth(x, y);
      if (!std::isfinite(pv) || !(pv > 0.0) || !std::isfinite(gv)) continue;
      if (gv < cfg.min_depth || gv > cfg.max_depth) continue;
      p.push_back(pv);
      g.push_back(gv);
    }
  if (p.empty()) throw ValueError("compute_metrics: no valid pixels to evaluate");

  if (cfg.median_scaling) {
    const double ratio = median(g) / median(p);
    for (double& v : p) v *= ratio;
  }
  for (double& v : p) v = std::clamp(v, cfg.min_depth, cfg.max_depth);

  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
  std::size_t a1 = 0, a2 = 0, a3 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double diff = p[i] - g[i];
    abs_rel += std::abs(diff) / g[i];
    sq_rel += diff * diff / g[i];
    sq += diff * diff;
    const double log_diff = std::log(p[i]) - std::log(g[i]);
    sq_log += log_diff * log_diff;
    const double ratio = std::max(p[i] / g[i], g[i] / p[i]);
    a1 += ratio < 1.25;
    a2 += ratio < 1.25 * 1.25;
    a3 += ratio < 1.25 * 1.25 * 1.25;
  }
  const auto n = static_cast<double>(p.size());
  return {abs_rel / n, sq_rel / n, std::sqrt(sq / n), std::sqrt(sq_log / n), a1 / n, a2 / n, a3 / n};
}

DisparityMap flip_postprocess(const DisparityMap& d, const DisparityMap& d_flipped, double ramp) {
  if (!d.disp.same_shape(d_flipped.disp)) throw ValueError("flip_postprocess: maps differ in size");
  const DisparityMap unflipped = hflip(d_flipped);
  const int w = d.width();

  // Weight of the un-flipped mirrored prediction at normalised column x.
  auto left_weight = [ramp](double x) {
    if (ramp <= 0.0) return 0.0;
    return 1.0 - std::clamp((x - ramp) / ramp, 0.0, 1.0);
  };

  DisparityMap out(w, d.height(), 0.0, false);
  for (int x = 0; x < w; ++x) {
    double wl = 0.0, wr = 0.0;
    if (w > 1) {
      wl = left_weight(static_cast<double>(x) / (w - 1));
      wr = left_weight(static_cast<double>(w - 1 - x) / (w - 1));
      if (wl + wr > 1.0) {
        const double s = wl + wr;
        wl /= s;
        wr /= s;
      }
    }
    const double wm = 1.0 - wl - wr;
    for (int y = 0; y < d.height(); ++y) {
      const bool va = d.is_valid(x, y);
      const bool vb = unflipped.is_valid(x, y);
      if (!va && !vb) continue;
      const double a = d.disp(x, y);
      const double b = unflipped.disp(x, y);
      if (va && vb)
        out.disp(x, y) = wr * a + wl * b + wm * (0.5 * (a + b));
      else
        out.disp(x, y) = va ? a : b;
      out.valid(x, y) = 1;
    }
  }
  return out;
}

}  // namespace depthhints::eval
