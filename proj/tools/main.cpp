#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowfill/config.hpp"
#include "flowfill/errors.hpp"
#include "flowfill/eval.hpp"
#include "flowfill/flow_completion.hpp"
#include "flowfill/io.hpp"
#include "flowfill/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace flowfill;

struct CliOverrides {
  RunConfig cfg;
  std::string config_path;
  std::string domain, edge_strategy, fallback;
  double tau = 5.0, temperature = 0.1;
  double canny_sigma = 1.0, canny_low = 0.1, canny_high = 0.2;
  std::vector<int> anchors;
  int dilation = 15, max_iterations = 20, threads = 1;
  std::string checkpoint_dir;
  bool ablate_nonlocal = false;
};

// Command-line flags win over config-file values.
void apply_overrides(CLI::App* cmd, CliOverrides& o) {
  if (!o.config_path.empty()) {
    RunConfig file_cfg = read_config_file(o.config_path);
    std::string frames = o.cfg.frames_dir, masks = o.cfg.masks_dir, out = o.cfg.out_dir;
    std::string flow = o.cfg.flow_dir, edges = o.cfg.edges_dir, fills = o.cfg.fills_dir;
    o.cfg = file_cfg;
    if (!frames.empty()) o.cfg.frames_dir = frames;
    if (!masks.empty()) o.cfg.masks_dir = masks;
    if (!out.empty()) o.cfg.out_dir = out;
    if (!flow.empty()) o.cfg.flow_dir = flow;
    if (!edges.empty()) o.cfg.edges_dir = edges;
    if (!fills.empty()) o.cfg.fills_dir = fills;
  }
  PipelineConfig& p = o.cfg.pipeline;
  auto set_if = [&](const char* flag, auto fn) {
    if (cmd->count(flag)) fn();
  };
  set_if("--tau", [&] { p.chain.tau = o.tau; });
  set_if("--anchors", [&] { p.chain.nonlocal_anchors = o.anchors; });
  set_if("--temperature", [&] { p.fusion.temperature = o.temperature; });
  set_if("--domain", [&] { p.fusion.domain = parse_domain(o.domain); });
  set_if("--edge-strategy", [&] { p.edge_strategy = parse_edge_strategy(o.edge_strategy); });
  set_if("--dilation", [&] { p.dilation_radius = o.dilation; });
  set_if("--max-iterations", [&] { p.max_pipeline_iterations = o.max_iterations; });
  set_if("--canny-sigma", [&] { p.canny_sigma = o.canny_sigma; });
  set_if("--canny-low", [&] { p.canny_low = o.canny_low; });
  set_if("--canny-high", [&] { p.canny_high = o.canny_high; });
  set_if("--threads", [&] { p.threads = o.threads; });
  set_if("--checkpoint-dir", [&] { p.checkpoint_dir = o.checkpoint_dir; });
  set_if("--fallback", [&] {
    if (o.fallback == "diffusion")
      p.fallback = SingleImageFillMethod::kDiffusion;
    else if (o.fallback == "external")
      p.fallback = SingleImageFillMethod::kExternal;
    else
      throw DataError("--fallback must be diffusion|external");
  });
  if (o.ablate_nonlocal) p.use_nonlocal = false;
}

void add_pipeline_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "flat key-value config file");
  cmd->add_option("--tau", o.tau, "chain consistency threshold in pixels");
  cmd->add_option("--anchors", o.anchors, "non-local anchor frame indices");
  cmd->add_option("--temperature", o.temperature, "fusion weight temperature");
  cmd->add_option("--domain", o.domain, "fusion domain: gradient|color");
  cmd->add_option("--edge-strategy", o.edge_strategy, "edge completion: none|link|external");
  cmd->add_flag("--ablate-nonlocal", o.ablate_nonlocal, "disable non-local candidates");
  cmd->add_option("--dilation", o.dilation, "mask dilation radius for flow completion");
  cmd->add_option("--max-iterations", o.max_iterations, "pipeline iteration cap");
  cmd->add_option("--canny-sigma", o.canny_sigma, "edge detector blur sigma");
  cmd->add_option("--canny-low", o.canny_low, "low hysteresis threshold fraction");
  cmd->add_option("--canny-high", o.canny_high, "high hysteresis threshold fraction");
  cmd->add_option("--threads", o.threads, "worker thread count");
  cmd->add_option("--checkpoint-dir", o.checkpoint_dir, "per-iteration frame dump directory");
  cmd->add_option("--flow-dir", o.cfg.flow_dir, "precomputed .flo directory (file-backed flow)");
  cmd->add_option("--edges-dir", o.cfg.edges_dir, "completed edge maps for --edge-strategy=external");
  cmd->add_option("--fills-dir", o.cfg.fills_dir, "single-image fills for --fallback=external");
  cmd->add_option("--fallback", o.fallback, "key-frame fill method: diffusion|external");
}

int cmd_complete(CLI::App* cmd, CliOverrides& o) {
  apply_overrides(cmd, o);
  RunConfig& cfg = o.cfg;
  if (cfg.frames_dir.empty() || cfg.masks_dir.empty() || cfg.out_dir.empty())
    throw DataError("complete: --frames, --masks and --out are required");

  auto [frames, masks] = read_sequence({cfg.frames_dir, cfg.masks_dir});
  const int n = static_cast<int>(frames.size());

  if (!cfg.flow_dir.empty())
    cfg.pipeline.estimator = std::make_shared<FileFlowEstimator>(cfg.flow_dir);

  std::map<std::pair<int, int>, EdgeMap> external_edges;
  if (!cfg.edges_dir.empty()) {
    for (const auto& entry : fs::directory_iterator(cfg.edges_dir)) {
      if (entry.path().extension() != ".png") continue;
      std::string stem = entry.path().stem().string();
      size_t us = stem.find('_');
      if (us == std::string::npos) continue;
      int i = std::stoi(stem.substr(0, us));
      int j = std::stoi(stem.substr(us + 1));
      external_edges[{i, j}] = read_edge_png(entry.path().string(), cfg.edge_binarize_threshold);
    }
    cfg.pipeline.external_edges = &external_edges;
  }

  std::map<int, Frame> external_fills;
  if (!cfg.fills_dir.empty()) {
    for (int i = 0; i < n; ++i) {
      fs::path p = fs::path(cfg.fills_dir) / frame_name(i);
      if (fs::exists(p)) external_fills[i] = read_frame_png(p.string());
    }
    cfg.pipeline.external_fills = &external_fills;
  }

  PipelineResult result = run(frames, masks, cfg.pipeline);
  write_frames_dir(cfg.out_dir, result.frames);

  json report;
  report["iterations"] = result.iterations;
  report["propagated_clean"] = result.propagated_clean;
  report["propagated_tainted"] = result.propagated_tainted;
  report["fallback_filled"] = result.fallback_filled;
  std::ofstream((fs::path(cfg.out_dir) / "run.json").string()) << report.dump(2) << "\n";
  return 0;
}

struct FlowCompleteArgs {
  std::string flow_path, mask_path, out_path, edges_path;
  std::string strategy = "link";
  int dilation = 0;
  double sigma = 1.0, low = 0.1, high = 0.2;
  double binarize = 0.5;
};

int cmd_flow_complete(const FlowCompleteArgs& a) {
  FlowField flow = read_flo(a.flow_path);
  MaskFrame mask = read_mask_png(a.mask_path);
  if (mask.width != flow.width || mask.height != flow.height)
    throw DataError("flow-complete: mask dimensions do not match the flow field");
  if (a.dilation > 0) mask = dilate_mask(mask, a.dilation);

  EdgeStrategy strategy = parse_edge_strategy(a.strategy);
  EdgeMap edges = canny(flow_magnitude(flow), a.sigma, a.low, a.high);
  edges = suppress_hole_edges(edges, mask);
  EdgeMap external;
  const EdgeMap* external_ptr = nullptr;
  if (strategy == EdgeStrategy::kExternal) {
    if (a.edges_path.empty()) throw DataError("flow-complete: --edges required for external strategy");
    external = read_edge_png(a.edges_path, a.binarize);
    external_ptr = &external;
  }
  edges = complete_edges(edges, mask, strategy, external_ptr);

  FlowCompletionProblem problem;
  problem.flow = &flow;
  problem.mask_dilated = &mask;
  problem.edges = strategy == EdgeStrategy::kNone ? nullptr : &edges;
  FlowCompletionStats stats;
  FlowField completed = complete_flow(problem, &stats);
  write_flo(a.out_path, completed);
  std::cout << "unknowns: " << mask.count() << "\n"
            << "cg_iterations: " << stats.cg_iterations << "\n"
            << "isolated: " << stats.isolated_pixels << "\n";
  return 0;
}

struct SynthArgs {
  std::string name, out;
  int width = 96, height = 96, frames = 20;
  unsigned seed = 1;
};

int cmd_synth(const SynthArgs& a) {
  SyntheticScene scene = synth_scene(a.name, a.width, a.height, a.frames, a.seed);
  fs::path out(a.out);
  write_frames_dir((out / "frames").string(), scene.frames);
  write_masks_dir((out / "masks").string(), scene.masks);
  write_frames_dir((out / "gt" / "frames").string(), scene.ground_truth_frames);
  fs::create_directories(out / "gt" / "flow");
  for (const auto& [key, flow] : scene.ground_truth_flows)
    write_flo(flow_pair_path((out / "gt" / "flow").string(), key.first, key.second), flow);
  fs::create_directories(out / "gt" / "edges");
  for (const auto& [key, edges] : scene.ground_truth_edges) {
    char name[32];
    std::snprintf(name, sizeof(name), "%05d_%05d.png", key.first, key.second);
    write_edge_png((out / "gt" / "edges" / name).string(), edges);
  }
  std::cout << "wrote " << scene.frames.size() << " frames to " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string ref_dir, test_dir, report_path, masks_dir;
};

int cmd_eval(const EvalArgs& a) {
  std::vector<Frame> ref = read_frames_dir(a.ref_dir);
  std::vector<Frame> test = read_frames_dir(a.test_dir);
  if (ref.size() != test.size())
    throw DataError("eval: sequences have different lengths (" + std::to_string(ref.size()) +
                    " vs " + std::to_string(test.size()) + ")");
  std::vector<MaskFrame> regions;
  if (!a.masks_dir.empty()) {
    for (size_t i = 0; i < ref.size(); ++i)
      regions.push_back(read_mask_png((fs::path(a.masks_dir) / frame_name(static_cast<int>(i))).string()));
  }

  json report;
  report["psnr"] = json::array();
  report["ssim"] = json::array();
  report["epe"] = json::array();
  double psnr_sum = 0, ssim_sum = 0;
  int psnr_n = 0;
  for (size_t i = 0; i < ref.size(); ++i) {
    if (ref[i].width != test[i].width || ref[i].height != test[i].height)
      throw DataError("eval: frame " + std::to_string(i) + " dimension mismatch");
    MaskFrame region = regions.empty() ? MaskFrame(ref[i].width, ref[i].height, true) : regions[i];
    std::optional<double> p;
    if (region.count() > 0) p = psnr(ref[i], test[i], region);
    double s = ssim(ref[i], test[i]);
    if (p) {
      report["psnr"].push_back(*p);
      psnr_sum += *p;
      ++psnr_n;
    } else {
      report["psnr"].push_back(nullptr);
    }
    report["ssim"].push_back(s);
    ssim_sum += s;
  }

  // Endpoint error over matching .flo files when both sides ship a flow/
  // subdirectory next to the frames.
  fs::path ref_flow = fs::path(a.ref_dir).parent_path() / "flow";
  fs::path test_flow = fs::path(a.test_dir).parent_path() / "flow";
  double epe_sum = 0;
  int epe_n = 0;
  if (fs::is_directory(ref_flow) && fs::is_directory(test_flow)) {
    for (const auto& entry : fs::directory_iterator(ref_flow)) {
      if (entry.path().extension() != ".flo") continue;
      fs::path other = test_flow / entry.path().filename();
      if (!fs::exists(other)) continue;
      FlowField f = read_flo(entry.path().string());
      FlowField g = read_flo(other.string());
      MaskFrame all(f.width, f.height, true);
      double e = flow_epe(f, g, all);
      report["epe"].push_back({{"pair", entry.path().stem().string()}, {"value", e}});
      epe_sum += e;
      ++epe_n;
    }
  }

  report["mean_psnr"] = psnr_n ? json(psnr_sum / psnr_n) : json(nullptr);
  report["mean_ssim"] = ssim_sum / static_cast<double>(ref.size());
  report["mean_epe"] = epe_n ? json(epe_sum / epe_n) : json(nullptr);

  std::ofstream file(a.report_path);
  if (!file) throw DataError("eval: cannot write " + a.report_path);
  file << report.dump(2) << "\n";
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_flo_info(const std::string& path) {
  FlowField f = read_flo(path);
  double max_mag = 0, sum_mag = 0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      Vec2 v = f.at(x, y);
      double m = std::sqrt(static_cast<double>(v.x) * v.x + static_cast<double>(v.y) * v.y);
      max_mag = std::max(max_mag, m);
      sum_mag += m;
    }
  std::cout << "width: " << f.width << "\n"
            << "height: " << f.height << "\n"
            << "max_magnitude: " << max_mag << "\n"
            << "mean_magnitude: " << sum_mag / (static_cast<double>(f.width) * f.height) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flow-based video completion"};
  app.require_subcommand(1);

  CliOverrides complete_args;
  CLI::App* complete = app.add_subcommand("complete", "run the full completion pipeline");
  complete->add_option("--frames", complete_args.cfg.frames_dir, "input frames directory");
  complete->add_option("--masks", complete_args.cfg.masks_dir, "mask directory (nonzero = missing)");
  complete->add_option("--out", complete_args.cfg.out_dir, "output frames directory");
  add_pipeline_flags(complete, complete_args);

  FlowCompleteArgs fc;
  CLI::App* flow_complete = app.add_subcommand("flow-complete", "complete one flow field through edges");
  flow_complete->add_option("--flow", fc.flow_path, "input .flo")->required();
  flow_complete->add_option("--mask", fc.mask_path, "unknown-region mask PNG")->required();
  flow_complete->add_option("--out", fc.out_path, "output .flo")->required();
  flow_complete->add_option("--edges", fc.edges_path, "external completed edge map PNG");
  flow_complete->add_option("--edge-strategy", fc.strategy, "none|link|external");
  flow_complete->add_option("--dilation", fc.dilation, "dilate the mask before solving");
  flow_complete->add_option("--canny-sigma", fc.sigma, "edge detector blur sigma");
  flow_complete->add_option("--canny-low", fc.low, "low hysteresis threshold fraction");
  flow_complete->add_option("--canny-high", fc.high, "high hysteresis threshold fraction");

  SynthArgs sy;
  CLI::App* synth = app.add_subcommand("synth", "emit a synthetic test scene");
  synth->add_option("--name", sy.name, "scene name")->required();
  synth->add_option("--out", sy.out, "output directory")->required();
  synth->add_option("--width", sy.width, "frame width");
  synth->add_option("--height", sy.height, "frame height");
  synth->add_option("--frames", sy.frames, "frame count");
  synth->add_option("--seed", sy.seed, "texture seed");

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "metrics between two sequences");
  eval_cmd->add_option("--ref", ev.ref_dir, "reference frames directory")->required();
  eval_cmd->add_option("--test", ev.test_dir, "test frames directory")->required();
  eval_cmd->add_option("--report", ev.report_path, "JSON report path")->required();
  eval_cmd->add_option("--masks", ev.masks_dir, "restrict PSNR to these mask regions");

  std::string flo_path;
  CLI::App* flo = app.add_subcommand("flo", "inspect .flo files");
  CLI::App* flo_info = flo->add_subcommand("info", "print field dimensions and stats");
  flo_info->add_option("path", flo_path, ".flo file")->required();
  flo->require_subcommand(1);

  try {
    app.parse(argc, argv);
    if (*complete) return cmd_complete(complete, complete_args);
    if (*flow_complete) return cmd_flow_complete(fc);
    if (*synth) return cmd_synth(sy);
    if (*eval_cmd) return cmd_eval(ev);
    if (*flo_info) return cmd_flo_info(flo_path);
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const flowfill::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const flowfill::DegenerateAlignment& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const flowfill::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
