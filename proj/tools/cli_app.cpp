#include "cli_app.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "depthhints/eval.hpp"
#include "depthhints/hints.hpp"
#include "depthhints/io.hpp"
#include "depthhints/losses.hpp"
#include "depthhints/optimizer.hpp"
#include "depthhints/parallel.hpp"
#include "depthhints/scene.hpp"
#include "depthhints/sgm.hpp"

namespace depthhints::cli {

namespace fs = std::filesystem;

namespace {

struct SgmOptions {
  int block_size = 5;
  int num_disparities = 64;
  std::optional<std::uint32_t> p1, p2;
  int uniqueness = 10;
  int paths = 8;
  int census_window = 5;
  bool grid = false;
  bool random = false;
  bool lr_check = false;
  double lr_threshold = sgm::kDefaultLrThreshold;

  sgm::SgmParams params() const {
    sgm::SgmParams p = sgm::SgmParams::with_defaults(block_size, num_disparities);
    if (p1) p.p1 = *p1;
    if (p2) p.p2 = *p2;
    p.uniqueness_ratio = uniqueness;
    p.num_paths = paths;
    p.census_window = census_window;
    return p;
  }

  void add_to(CLI::App* app) {
    app->add_option("--block-size", block_size, "Odd block size of the cost window")->capture_default_str();
    app->add_option("--num-disparities", num_disparities, "Disparity search range (multiple of 16)")
        ->capture_default_str();
    app->add_option("--p1", p1, "Small-jump penalty (default 8*block^2)");
    app->add_option("--p2", p2, "Large-jump penalty (default 32*block^2)");
    app->add_option("--uniqueness", uniqueness, "Uniqueness ratio in percent")->capture_default_str();
    app->add_option("--paths", paths, "Aggregation directions (4 or 8)")->capture_default_str();
    app->add_option("--census-window", census_window, "Odd census window size")->capture_default_str();
    app->add_flag("--lr-check", lr_check, "Invalidate pixels failing the left-right consistency check");
    app->add_option("--lr-threshold", lr_threshold, "Left-right agreement threshold in pixels")->capture_default_str();
  }
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::string indexed(const std::string& stem, int i, int width = 2) {
  std::ostringstream os;
  os << stem << '_' << std::setw(width) << std::setfill('0') << i << ".png";
  return os.str();
}

void write_params_csv(const fs::path& path, const std::vector<sgm::SgmParams>& grid) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "index,block_size,num_disparities,p1,p2,uniqueness_ratio,num_paths,census_window\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& p = grid[i];
    out << i << ',' << p.block_size << ',' << p.num_disparities << ',' << p.p1 << ',' << p.p2 << ','
        << p.uniqueness_ratio << ',' << p.num_paths << ',' << p.census_window << '\n';
  }
}

std::pair<Image, Image> load_pair(const std::string& left, const std::string& right) {
  Image l = io::read_image(left);
  Image r = io::read_image(right);
  if (!l.same_shape(r)) throw ValueError("left and right images differ in size or channel count");
  return {std::move(l), std::move(r)};
}

// Depth from a .pfm (meters) or a disparity PNG16 converted with `calib`.
DepthMap load_depth(const std::string& path, const std::optional<StereoCalibration>& calib) {
  if (fs::path(path).extension() == ".pfm") {
    io::PfmData pfm = io::read_pfm(path);
    DepthMap d(pfm.values.width(), pfm.values.height(), 0.0, false);
    for (std::size_t i = 0; i < d.depth.size(); ++i) {
      d.depth[i] = pfm.values[i];
      d.valid[i] = pfm.valid[i] && pfm.values[i] > 0.0;
    }
    return d;
  }
  if (!calib) throw ValueError("--calib is required to convert disparity PNGs to depth");
  return disparity_to_depth(io::read_disparity_png16(path), *calib);
}

optimizer::Init parse_init(const std::string& text, std::uint64_t seed) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "flat") return optimizer::FlatInit{rest.empty() ? 0.0 : std::stod(rest)};
  if (kind == "map") {
    if (rest.empty()) throw ValueError("--init map:PATH needs a path");
    return optimizer::MapInit{io::read_disparity_png16(rest)};
  }
  if (kind == "random") {
    const auto sep = rest.find(':');
    if (sep == std::string::npos) throw ValueError("--init random:LO:HI needs a range");
    return optimizer::RandomInit{std::stod(rest.substr(0, sep)), std::stod(rest.substr(sep + 1)), seed};
  }
  throw ValueError("--init must be flat:V, map:PATH or random:LO:HI");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth hints toolkit: SGM hints, photometric losses, disparity descent and depth evaluation",
               "depth-hints"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  int threads = 0;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "Worker thread cap (0: DEPTHHINTS_THREADS or all cores)");
  app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();

  // render
  std::string scene_path, out_path;
  auto* render = app.add_subcommand("render", "Render a synthetic stereo pair from a scene file");
  render->add_option("--scene", scene_path, "Scene description file")->required();
  render->add_option("--out", out_path, "Output directory")->required();

  // sgm
  std::string left_path, right_path;
  SgmOptions sgm_opts;
  auto* sgm_cmd = app.add_subcommand("sgm", "Semi-global matching disparity (PNG16)");
  sgm_cmd->add_option("--left", left_path, "Left image")->required();
  sgm_cmd->add_option("--right", right_path, "Right image")->required();
  sgm_cmd->add_option("--out", out_path, "Output PNG (directory with --grid)")->required();
  sgm_opts.add_to(sgm_cmd);
  auto* grid_flag = sgm_cmd->add_flag("--grid", sgm_opts.grid, "Run the full 12-entry hint parameter grid");
  sgm_cmd->add_flag("--random", sgm_opts.random, "Draw the parameters from the grid using --seed")->excludes(grid_flag);

  // fuse-hints
  std::vector<std::string> candidate_paths;
  bool fuse_grid = false, fuse_lr = false;
  double alpha = kDefaultAlpha;
  int direction = -1;
  auto* fuse_cmd = app.add_subcommand("fuse-hints", "Fuse SGM candidates by per-pixel DSSIM+L1 score");
  fuse_cmd->add_option("--left", left_path, "Left image")->required();
  fuse_cmd->add_option("--right", right_path, "Right image")->required();
  fuse_cmd->add_option("--out", out_path, "Output directory")->required();
  auto* cand_opt = fuse_cmd->add_option("--candidates", candidate_paths, "Candidate disparity PNG16 files")
                       ;
  fuse_cmd->add_flag("--grid", fuse_grid, "Generate the 12 grid candidates first")->excludes(cand_opt);
  fuse_cmd->add_flag("--lr-check", fuse_lr, "Apply the left-right check to generated candidates");
  fuse_cmd->add_option("--alpha", alpha, "DSSIM weight")->capture_default_str();
  fuse_cmd->add_option("--direction", direction, "Warp direction (+1 or -1)")->capture_default_str();

  // loss-map
  std::string disp_path, hint_path;
  auto* loss_cmd = app.add_subcommand("loss-map", "DSSIM+L1 loss of a disparity map, optionally hint-gated");
  loss_cmd->add_option("--left", left_path, "Reference image")->required();
  loss_cmd->add_option("--right", right_path, "Other image")->required();
  loss_cmd->add_option("--disp", disp_path, "Disparity PNG16")->required();
  loss_cmd->add_option("--hint", hint_path, "Hint disparity PNG16");
  loss_cmd->add_option("--out", out_path, "Output directory")->required();
  loss_cmd->add_option("--alpha", alpha, "DSSIM weight")->capture_default_str();
  loss_cmd->add_option("--direction", direction, "Warp direction (+1 or -1)")->capture_default_str();

  // cost-curve
  int px = 0, py = 0, steps = 0;
  double d_max = 0.0;
  auto* curve_cmd = app.add_subcommand("cost-curve", "Per-pixel DSSIM+L1 cost over trial disparities (CSV)");
  curve_cmd->add_option("--left", left_path, "Reference image")->required();
  curve_cmd->add_option("--right", right_path, "Other image")->required();
  curve_cmd->add_option("--x", px, "Pixel column")->required();
  curve_cmd->add_option("--y", py, "Pixel row")->required();
  curve_cmd->add_option("--d-max", d_max, "Largest trial disparity")->required();
  curve_cmd->add_option("--steps", steps, "Number of trial disparities")->required();
  curve_cmd->add_option("--out", out_path, "Output CSV")->required();
  curve_cmd->add_option("--alpha", alpha, "DSSIM weight")->capture_default_str();
  curve_cmd->add_option("--direction", direction, "Warp direction (+1 or -1)")->capture_default_str();

  // optimize
  optimizer::OptimizeConfig opt_cfg;
  std::string init_text = "flat:0";
  auto* opt_cmd = app.add_subcommand("optimize", "Gradient descent on the disparity field");
  opt_cmd->add_option("--left", left_path, "Reference image")->required();
  opt_cmd->add_option("--right", right_path, "Other image")->required();
  opt_cmd->add_option("--hints", hint_path, "Hint disparity PNG16 (enables the gated objective)")
      ;
  opt_cmd->add_option("--out", out_path, "Output directory")->required();
  opt_cmd->add_option("--iterations", opt_cfg.iterations, "Descent iterations")->capture_default_str();
  opt_cmd->add_option("--step", opt_cfg.step_size, "Step size")->capture_default_str();
  opt_cmd->add_option("--record-every", opt_cfg.record_every, "Snapshot stride")->capture_default_str();
  opt_cmd->add_option("--init", init_text, "flat:V | map:PATH | random:LO:HI")->capture_default_str();
  opt_cmd->add_option("--d-max", opt_cfg.d_max, "Disparity clamp (<= 0: 0.3 * width)")->capture_default_str();
  opt_cmd->add_option("--alpha", opt_cfg.alpha, "DSSIM weight")->capture_default_str();
  opt_cmd->add_option("--direction", opt_cfg.direction, "Warp direction (+1 or -1)")->capture_default_str();

  // eval
  std::string pred_path, gt_path, calib_path, flipped_path, format = "csv", eval_out;
  eval::EvalConfig eval_cfg;
  bool garg = false;
  double pp_ramp = 0.05;
  auto* eval_cmd = app.add_subcommand("eval", "Seven standard depth metrics");
  eval_cmd->add_option("--pred", pred_path, "Prediction (.pfm depth or disparity PNG16)")->required()
      ;
  eval_cmd->add_option("--gt", gt_path, "Ground truth (.pfm depth or disparity PNG16)")->required()
      ;
  eval_cmd->add_option("--calib", calib_path, "Calibration file for disparity inputs");
  eval_cmd->add_option("--pred-flipped", flipped_path, "Disparity PNG16 predicted on the mirrored image")
      ;
  eval_cmd->add_option("--pp-ramp", pp_ramp, "Edge ramp fraction of flip post-processing (0: plain mean)")
      ->capture_default_str();
  eval_cmd->add_option("--min-depth", eval_cfg.min_depth, "Minimum depth in meters")->capture_default_str();
  eval_cmd->add_option("--max-depth", eval_cfg.max_depth, "Depth cap in meters")->capture_default_str();
  eval_cmd->add_flag("--garg-crop", garg, "Evaluate inside the Garg crop");
  eval_cmd->add_flag("--median-scaling", eval_cfg.median_scaling, "Scale predictions by the median ratio");
  eval_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Output file (default: stdout)");

  std::vector<std::string> argv(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv.begin(), argv.end());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (threads <= 0) {
      if (const char* env = std::getenv("DEPTHHINTS_THREADS")) threads = std::atoi(env);
    }
    set_max_threads(threads > 0 ? threads : 0);
    out << std::setprecision(9);

    if (*render) {
      const io::SceneSpec spec = io::read_scene(scene_path);
      const io::SyntheticPair pair = io::render_scene(spec);
      const fs::path dir(out_path);
      ensure_dir(dir);
      io::write_image_png(dir / "left.png", pair.left);
      io::write_image_png(dir / "right.png", pair.right);
      io::write_disparity_png16(dir / "gt_disparity.png", pair.gt_disparity);
      io::write_mask_png(dir / "occlusion.png", pair.occlusion_mask);
    } else if (*sgm_cmd) {
      const auto [left, right] = load_pair(left_path, right_path);
      if (sgm_opts.grid) {
        const auto grid = hints::param_grid();
        const hints::HintCandidateSet set = hints::generate_candidates(left, right, grid, sgm_opts.lr_check);
        const fs::path dir(out_path);
        ensure_dir(dir);
        for (std::size_t i = 0; i < set.candidates.size(); ++i)
          io::write_disparity_png16(dir / indexed("candidate", static_cast<int>(i)), set.candidates[i]);
        write_params_csv(dir / "params.csv", grid);
      } else {
        sgm::SgmParams params = sgm_opts.params();
        if (sgm_opts.random) {
          Rng rng(seed);
          params = hints::random_params(rng);
          out << "block_size," << params.block_size << "\nnum_disparities," << params.num_disparities << '\n';
        }
        io::write_disparity_png16(out_path, sgm::sgm_match(left, right, params, sgm_opts.lr_check,
                                                           sgm_opts.lr_threshold));
      }
    } else if (*fuse_cmd) {
      const auto [left, right] = load_pair(left_path, right_path);
      hints::HintCandidateSet set;
      const fs::path dir(out_path);
      ensure_dir(dir);
      if (fuse_grid) {
        set = hints::generate_candidates(left, right, hints::param_grid(), fuse_lr);
        for (std::size_t i = 0; i < set.candidates.size(); ++i)
          io::write_disparity_png16(dir / indexed("candidate", static_cast<int>(i)), set.candidates[i]);
        write_params_csv(dir / "params.csv", set.params);
      } else {
        if (candidate_paths.empty()) throw ValueError("fuse-hints needs --candidates or --grid");
        for (const auto& p : candidate_paths) {
          set.candidates.push_back(io::read_disparity_png16(p));
          set.params.push_back({});
        }
      }
      const hints::FusedHint fused = hints::fuse(set, left, right, alpha, direction);
      io::write_disparity_png16(dir / "fused.png", fused.disp);
      Grid<std::uint16_t> index(fused.source_index.width(), fused.source_index.height(), 0);
      for (std::size_t i = 0; i < index.size(); ++i)
        index[i] = static_cast<std::uint16_t>(fused.source_index[i] + 1);
      io::write_png16(dir / "source_index.png", index);
      io::write_pfm(dir / "score.pfm", fused.score, &fused.disp.valid);
    } else if (*loss_cmd) {
      const auto [left, right] = load_pair(left_path, right_path);
      const DisparityMap disp = io::read_disparity_png16(disp_path);
      const fs::path dir(out_path);
      ensure_dir(dir);
      const LossField loss = photometric_loss_of_disparity(left, right, disp, direction, alpha);
      io::write_pfm(dir / "loss.pfm", loss);
      out << "mean_loss," << reduce_mean(loss) << '\n';
      if (!hint_path.empty()) {
        const DisparityMap hint = io::read_disparity_png16(hint_path);
        const GatedLoss gated = hint_gated_loss(left, right, disp, hint, direction, alpha);
        io::write_pfm(dir / "gated_loss.pfm", gated.loss);
        io::write_mask_png(dir / "gate.png", gated.gate);
        out << "mean_gated_loss," << reduce_mean(gated.loss) << '\n';
        out << "hint_usage_fraction," << hint_usage_fraction(gated) << '\n';
      }
    } else if (*curve_cmd) {
      const auto [left, right] = load_pair(left_path, right_path);
      const auto curve = optimizer::cost_curve(left, right, px, py, d_max, steps, alpha, direction);
      std::ofstream csv(out_path);
      if (!csv) throw IoError("cannot write " + out_path);
      csv << std::setprecision(9) << "disparity,loss\n";
      for (const auto& p : curve) csv << p.disparity << ',' << p.loss << '\n';
      if (!csv) throw IoError("failed writing " + out_path);
    } else if (*opt_cmd) {
      const auto [left, right] = load_pair(left_path, right_path);
      opt_cfg.init = parse_init(init_text, seed);
      std::optional<DisparityMap> hint;
      if (!hint_path.empty()) hint = io::read_disparity_png16(hint_path);
      opt_cfg.use_hints = hint.has_value();
      const optimizer::Trajectory traj = optimizer::optimize(left, right, opt_cfg, hint ? &*hint : nullptr);
      const fs::path dir(out_path);
      ensure_dir(dir);
      std::ofstream csv(dir / "trajectory.csv");
      if (!csv) throw IoError("cannot write trajectory.csv");
      csv << std::setprecision(9) << "iteration,mean_loss,hint_fraction\n";
      for (const auto& s : traj.snapshots) {
        csv << s.iteration << ',' << s.mean_loss << ',' << s.hint_fraction << '\n';
        io::write_disparity_png16(dir / indexed("snapshot", s.iteration, 5), s.disp);
      }
      io::write_disparity_png16(dir / "final.png", traj.final);
    } else if (*eval_cmd) {
      std::optional<StereoCalibration> calib;
      if (!calib_path.empty()) calib = io::read_calibration(calib_path);
      DepthMap pred;
      if (!flipped_path.empty()) {
        if (fs::path(pred_path).extension() == ".pfm") throw ValueError("--pred-flipped needs disparity PNG inputs");
        if (!calib) throw ValueError("--calib is required to convert disparity PNGs to depth");
        const DisparityMap pp = eval::flip_postprocess(io::read_disparity_png16(pred_path),
                                                       io::read_disparity_png16(flipped_path), pp_ramp);
        pred = disparity_to_depth(pp, *calib);
      } else {
        pred = load_depth(pred_path, calib);
      }
      const DepthMap gt = load_depth(gt_path, calib);
      if (garg) eval_cfg.crop = eval::garg_crop(gt.width(), gt.height());
      const eval::DepthMetrics m = eval::compute_metrics(pred, gt, eval_cfg);

      std::ostringstream row;
      row << std::setprecision(9);
      const auto values = m.values();
      if (format == "csv") {
        for (std::size_t i = 0; i < values.size(); ++i) row << (i ? "," : "") << eval::kMetricNames[i];
        row << '\n';
        for (std::size_t i = 0; i < values.size(); ++i) row << (i ? "," : "") << values[i];
        row << '\n';
      } else {
        row << '{';
        for (std::size_t i = 0; i < values.size(); ++i)
          row << (i ? ", " : "") << '"' << eval::kMetricNames[i] << "\": " << values[i];
        row << "}\n";
      }
      if (eval_out.empty()) {
        out << row.str();
      } else {
        std::ofstream f(eval_out);
        if (!f) throw IoError("cannot write " + eval_out);
        f << row.str();
      }
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kOk;
}

}  // namespace depthhints::cli
