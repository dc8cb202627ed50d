#include "depthhints/optimizer.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "depthhints/parallel.hpp"
#include "window.hpp"

namespace depthhints::optimizer {

namespace {

// Number of times pixel (x,y) appears in its own edge-replicated 3x3 window.
int self_multiplicity(int x, int y, int w, int h) {
  auto axis = [](int i, int n) {
    int m = 0;
    for (int k = -1; k <= 1; ++k) m += detail::clamp_index(i + k, n) == i;
    return m;
  };
  return axis(x, w) * axis(y, h);
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

void check_inputs(const Image& ref, const Image& other, const DisparityMap& disp) {
  if (!ref.same_shape(other)) throw ValueError("reference and other image differ in size");
  if (!disp.disp.same_shape(ref.width(), ref.height())) throw ValueError("disparity and image differ in size");
}

// Gradient from an existing warp of `other` by `disp`.
Grid<double> gradient_from_warp(const Image& ref, const Image& other, const DisparityMap& disp, const WarpResult& warp,
                                double alpha, int direction) {
  const int w = ref.width();
  const int h = ref.height();
  const int channels = ref.channels();
  Grid<double> grad(w, h, 0.0);
  parallel_for(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!warp.in_bounds(x, y)) continue;
      const double u = x + direction * disp.disp(x, y);
      const double self = self_multiplicity(x, y, w, h) / 9.0;
      double g = 0.0;
      for (int c = 0; c < channels; ++c) {
        const double dwarp = direction * detail::sample_row(other, y, u, c).slope;
        const double a = ref(x, y, c);
        const double b = warp.image(x, y, c);

        g += (1.0 - alpha) * sign(b - a) * dwarp;

        const detail::Moments m = detail::window_moments(ref, warp.image, x, y, c);
        const detail::SsimTerms t = detail::ssim_terms(m);
        const double s = t.value();
        if (s <= -1.0 || s >= 1.0) continue;  // clamped: flat
        const double lum_num_d = 2.0 * m.mu_a * self;
        const double con_num_d = 2.0 * (a - m.mu_a) * self;
        const double lum_den_d = 2.0 * m.mu_b * self;
        const double con_den_d = 2.0 * (b - m.mu_b) * self;
        const double den = t.lum_den * t.con_den;
        const double ds = (lum_num_d * t.con_num + t.lum_num * con_num_d) / den -
                          s * (lum_den_d * t.con_den + t.lum_den * con_den_d) / den;
        g += -alpha / 2.0 * ds * dwarp;
      }
      grad(x, y) = g / channels;
    }
  });
  return grad;
}

void add_hint_term(Grid<double>& grad, const DisparityMap& disp, const DisparityMap& hint, const Mask& gate) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!gate[i]) continue;
    const double r = disp.disp[i] - hint.disp[i];
    grad[i] += sign(r) / (1.0 + std::abs(r));
  }
}

DisparityMap initial_field(const OptimizeConfig& cfg, int w, int h) {
  return std::visit(
      [&](const auto& init) -> DisparityMap {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, FlatInit>) {
          return DisparityMap(w, h, init.value, true);
        } else if constexpr (std::is_same_v<T, MapInit>) {
          if (!init.map.disp.same_shape(w, h)) throw ValueError("initial disparity map has the wrong size");
          DisparityMap d = init.map;
          for (std::size_t i = 0; i < d.disp.size(); ++i)
            if (!d.valid[i] || !std::isfinite(d.disp[i])) {
              d.disp[i] = 0.0;
              d.valid[i] = 1;
            }
          return d;
        } else {
          if (!(init.hi >= init.lo)) throw ValueError("random init: empty range");
          Rng rng(init.seed);
          DisparityMap d(w, h);
          for (double& v : d.disp.data()) v = rng.uniform(init.lo, init.hi);
          return d;
        }
      },
      cfg.init);
}

}  // namespace

void OptimizeConfig::validate() const {
  std::ostringstream err;
  if (iterations < 0) err << "iterations must be >= 0; ";
  if (!(step_size > 0.0)) err << "step_size must be positive; ";
  if (!(alpha >= 0.0 && alpha <= 1.0)) err << "alpha must lie in [0,1]; ";
  if (record_every < 1) err << "record_every must be >= 1; ";
  if (direction != 1 && direction != -1) err << "direction must be +1 or -1; ";
  if (!err.str().empty()) throw ValueError("invalid optimizer config: " + err.str());
}

Grid<double> photometric_gradient(const Image& ref, const Image& other, const DisparityMap& disp, double alpha,
                                  int direction) {
  check_inputs(ref, other, disp);
  return gradient_from_warp(ref, other, disp, warp_disparity(other, disp, direction), alpha, direction);
}

Grid<double> gated_gradient(const Image& ref, const Image& other, const DisparityMap& disp, const DisparityMap& hint,
                            double alpha, int direction, const Mask* frozen_gate) {
  check_inputs(ref, other, disp);
  if (!hint.disp.same_shape(disp.disp)) throw ValueError("hint and disparity differ in size");
  const WarpResult warp = warp_disparity(other, disp, direction);
  Grid<double> grad = gradient_from_warp(ref, other, disp, warp, alpha, direction);
  if (frozen_gate) {
    if (!frozen_gate->same_shape(disp.disp)) throw ValueError("frozen gate has the wrong size");
    add_hint_term(grad, disp, hint, *frozen_gate);
  } else {
    const GatedLoss g = gate_losses(dssim_l1(ref, warp, alpha),
                                    photometric_loss_of_disparity(ref, other, hint, direction, alpha), disp, hint);
    add_hint_term(grad, disp, hint, g.gate);
  }
  return grad;
}

Trajectory optimize(const Image& ref, const Image& other, const OptimizeConfig& cfg, const DisparityMap* hint) {
  cfg.validate();
  if (!ref.same_shape(other)) throw ValueError("optimize: reference and other image differ in size");
  if (cfg.use_hints && !hint) throw ValueError("optimize: use_hints requires a hint map");
  if (hint && !hint->disp.same_shape(ref.width(), ref.height()))
    throw ValueError("optimize: hint and image differ in size");

  const double d_max = cfg.d_max > 0.0 ? cfg.d_max : 0.3 * ref.width();
  DisparityMap disp = initial_field(cfg, ref.width(), ref.height());
  for (double& v : disp.disp.data()) v = std::clamp(v, 0.0, d_max);

  // The hint is fixed, so its photometric loss is computed once.
  LossField hint_loss;
  if (cfg.use_hints) hint_loss = photometric_loss_of_disparity(ref, other, *hint, cfg.direction, cfg.alpha);

  Trajectory traj;
  for (int it = 0;; ++it) {
    const WarpResult warp = warp_disparity(other, disp, cfg.direction);
    const LossField photometric = dssim_l1(ref, warp, cfg.alpha);
    Grid<double> grad = gradient_from_warp(ref, other, disp, warp, cfg.alpha, cfg.direction);

    double mean_loss = 0.0, fraction = 0.0;
    if (cfg.use_hints) {
      const GatedLoss g = gate_losses(photometric, hint_loss, disp, *hint);
      add_hint_term(grad, disp, *hint, g.gate);
      mean_loss = reduce_mean(g.loss);
      fraction = hint_usage_fraction(g);
    } else {
      mean_loss = reduce_mean(photometric);
    }

    const bool last = it == cfg.iterations;
    if (it % cfg.record_every == 0 || last) traj.snapshots.push_back({it, disp, mean_loss, fraction});
    if (last) break;

    for (std::size_t i = 0; i < disp.disp.size(); ++i)
      disp.disp[i] = std::clamp(disp.disp[i] - cfg.step_size * grad[i], 0.0, d_max);
  }
  traj.final = disp;
  return traj;
}

std::vector<CurvePoint> cost_curve(const Image& ref, const Image& other, int x, int y, double d_max, int steps,
                                   double alpha, int direction) {
  if (!ref.same_shape(other)) throw ValueError("cost_curve: images differ in size");
  if (x < 0 || x >= ref.width() || y < 0 || y >= ref.height()) throw ValueError("cost_curve: pixel outside the image");
  if (steps < 1 || !(d_max >= 0.0)) throw ValueError("cost_curve: need steps >= 1 and d_max >= 0");

  const int w = ref.width();
  const int h = ref.height();
  const int channels = ref.channels();
  // 3x3 patches gathered with edge replication, so the window maths at the
  // patch centre matches the full-image computation.
  Image ref_patch(3, 3, channels), warp_patch(3, 3, channels);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      for (int c = 0; c < channels; ++c)
        ref_patch(dx + 1, dy + 1, c) = ref(detail::clamp_index(x + dx, w), detail::clamp_index(y + dy, h), c);

  std::vector<CurvePoint> curve;
  curve.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    const double d = steps == 1 ? 0.0 : d_max * k / (steps - 1);
    if (!detail::inside_row(x + direction * d, w)) {
      curve.push_back({d, std::numeric_limits<double>::infinity()});
      continue;
    }
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int xx = detail::clamp_index(x + dx, w);
        const int yy = detail::clamp_index(y + dy, h);
        for (int c = 0; c < channels; ++c)
          warp_patch(dx + 1, dy + 1, c) = detail::sample_row(other, yy, xx + direction * d, c).value;
      }
    curve.push_back({d, detail::pixel_dssim_l1(ref_patch, warp_patch, 1, 1, alpha)});
  }
  return curve;
}

}  // namespace depthhints::optimizer
