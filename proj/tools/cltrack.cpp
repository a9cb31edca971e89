// cltrack: camera/LiDAR multi-object tracking from detection files.
//
//   cltrack track    --det2d D2 --det3d D3 --calib C [--config F] --out OUT [--mono 2d|3d]
//   cltrack eval     --gt GT --hyp HYP [--iou-gate 0.5]
//   cltrack simulate --scenario S --seed N --dropout2d P --dropout3d P --out-dir DIR
//   cltrack plot     --hyp HYP [--gt GT] --out DIR
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "cltrack/cltrack.hpp"

namespace
{

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::filesystem::path & path)
{
  std::ofstream out(path);
  if (!out) {
    throw cltrack::DataError("cannot write " + path.string());
  }
  return out;
}

std::vector<cltrack::FrameResult> read_kitti_file(const std::string & path)
{
  return cltrack::detail::parse_file(path, [](std::istream & in) { return cltrack::parse_kitti(in); });
}

struct TrackArgs
{
  std::string det2d;
  std::string det3d;
  std::string calib;
  std::string config;
  std::string out;
  std::string mono;
  std::string manifest;
  std::vector<std::string> overrides;
  int frames = -1;
};

int run_track(const TrackArgs & args)
{
  cltrack::SensorMode sensors = cltrack::SensorMode::both;
  if (args.mono == "2d") {
    sensors = cltrack::SensorMode::mono_2d;
  } else if (args.mono == "3d") {
    sensors = cltrack::SensorMode::mono_3d;
  } else if (!args.mono.empty()) {
    throw UsageError("--mono must be 2d or 3d");
  }
  if (sensors != cltrack::SensorMode::mono_3d && args.det2d.empty()) {
    throw UsageError("--det2d is required unless --mono 3d");
  }
  if (sensors != cltrack::SensorMode::mono_2d && args.det3d.empty()) {
    throw UsageError("--det3d is required unless --mono 2d");
  }

  cltrack::KeyValueFile kv;
  if (!args.config.empty()) {
    kv = cltrack::detail::parse_file(args.config, [](std::istream & in) {
      return cltrack::KeyValueFile::parse(in);
    });
  }
  for (const auto & o : args.overrides) {
    kv.set_assignment(o);
  }
  cltrack::TrackerConfig config;
  config.apply(kv);
  config.validate();

  auto input = cltrack::load_sequence({args.det2d, args.det3d, args.calib}, sensors);
  if (args.frames >= 0) {
    input.frame_count = args.frames;
  }
  const auto output = cltrack::run_sequence(input, config);

  auto out = open_output(args.out);
  cltrack::write_kitti(out, output.results);
  if (!args.manifest.empty()) {
    open_output(args.manifest) << output.manifest.to_json().dump(2) << '\n';
  }
  std::cerr << "tracked " << output.manifest.total_frames << " frames, "
            << output.manifest.tracks_created << " tracks, "
            << output.manifest.total_seconds() << " s\n";
  return 0;
}

int run_eval(const std::string & gt_path, const std::string & hyp_path, double gate, const std::string & category)
{
  const auto gt = read_kitti_file(gt_path);
  const auto hyp = read_kitti_file(hyp_path);
  cltrack::EvalOptions options;
  options.iou_gate = gate;
  if (!category.empty()) {
    options.category = category;
  }
  const auto s = cltrack::evaluate(gt, hyp, options);
  std::cout << "MOTA " << s.mota << '\n'
            << "MOTP " << s.motp << '\n'
            << "TP " << s.tp << '\n'
            << "FP " << s.fp << '\n'
            << "FN " << s.fn << '\n'
            << "IDSW " << s.idsw << '\n'
            << "Frag " << s.frag << '\n'
            << "MT " << s.mt << '\n'
            << "ML " << s.ml << '\n'
            << "GT_tracks " << s.gt_tracks << '\n'
            << "GT_total " << s.gt_total << '\n';
  return 0;
}

int run_simulate(const std::string & scenario_path, const cltrack::sim::DistortionSpec & spec, const std::string & dir)
{
  const auto scenario = cltrack::detail::parse_file(scenario_path, [](std::istream & in) {
    return cltrack::sim::parse_scenario(in);
  });
  const auto gt = cltrack::sim::generate_ground_truth(scenario);
  const auto dets = cltrack::sim::degrade(gt, spec);

  const std::filesystem::path out_dir(dir);
  std::filesystem::create_directories(out_dir);
  {
    auto out = open_output(out_dir / "det2d.txt");
    cltrack::sim::write_detections_2d(out, dets.det2d);
  }
  {
    auto out = open_output(out_dir / "det3d.txt");
    cltrack::sim::write_detections_3d(out, dets.det3d);
  }
  {
    auto out = open_output(out_dir / "calib.txt");
    cltrack::write_calibration(out, scenario.calib);
  }
  {
    auto out = open_output(out_dir / "gt.txt");
    cltrack::write_kitti(out, gt.results());
  }
  {
    auto out = open_output(out_dir / "config.txt");
    out << "# tracker settings matching the scenario image\n"
        << "image_width = " << scenario.image.width << '\n'
        << "image_height = " << scenario.image.height << '\n';
  }
  std::cerr << "simulated " << scenario.length << " frames, " << scenario.objects.size()
            << " objects into " << out_dir.string() << '\n';
  return 0;
}

int run_plot(const std::string & hyp_path, const std::string & gt_path, const std::string & dir, int width, int height)
{
  const auto hyp = read_kitti_file(hyp_path);
  std::vector<cltrack::FrameResult> gt;
  if (!gt_path.empty()) {
    gt = read_kitti_file(gt_path);
  }
  cltrack::plot::PlotOptions options;
  options.image = {width, height};
  const auto files = cltrack::plot::write_plots(dir, hyp, gt, options);
  std::cerr << "wrote " << files << " figures to " << dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"camera/LiDAR multi-object tracker"};
  app.require_subcommand(1);

  TrackArgs track;
  auto * track_cmd = app.add_subcommand("track", "track a sequence of detections");
  track_cmd->add_option("--det2d", track.det2d, "2D detection file");
  track_cmd->add_option("--det3d", track.det3d, "3D detection file");
  track_cmd->add_option("--calib", track.calib, "KITTI calibration file")->required();
  track_cmd->add_option("--config", track.config, "key = value tracker configuration");
  track_cmd->add_option("--out", track.out, "KITTI tracking output file")->required();
  track_cmd->add_option("--mono", track.mono, "single detector mode: 2d or 3d");
  track_cmd->add_option("--set", track.overrides, "configuration override key=value (repeatable)");
  track_cmd->add_option("--manifest", track.manifest, "write the run manifest (JSON) here");
  track_cmd->add_option("--frames", track.frames, "number of frames to run");

  std::string gt_path, hyp_path, category;
  double gate = 0.5;
  auto * eval_cmd = app.add_subcommand("eval", "CLEAR-MOT evaluation of KITTI tracking results");
  eval_cmd->add_option("--gt", gt_path, "ground truth")->required();
  eval_cmd->add_option("--hyp", hyp_path, "tracker output")->required();
  eval_cmd->add_option("--iou-gate", gate, "2D IoU needed for a match");
  eval_cmd->add_option("--category", category, "evaluate only this category");

  std::string scenario_path, out_dir;
  cltrack::sim::DistortionSpec spec;
  auto * sim_cmd = app.add_subcommand("simulate", "generate detections and ground truth from a scenario");
  sim_cmd->add_option("--scenario", scenario_path, "scenario file")->required();
  sim_cmd->add_option("--seed", spec.seed, "random seed")->required();
  sim_cmd->add_option("--dropout2d", spec.dropout2d, "2D detection dropout probability")->required();
  sim_cmd->add_option("--dropout3d", spec.dropout3d, "3D detection dropout probability")->required();
  sim_cmd->add_option("--jitter2d", spec.jitter2d, "2D corner noise std, pixels");
  sim_cmd->add_option("--jitter3d", spec.jitter3d, "3D center noise std, meters");
  sim_cmd->add_option("--out-dir", out_dir, "output directory")->required();

  std::string plot_hyp, plot_gt, plot_out;
  int width = 1242;
  int height = 375;
  auto * plot_cmd = app.add_subcommand("plot", "emit SVG overlays and trajectory plots");
  plot_cmd->add_option("--hyp", plot_hyp, "tracker output")->required();
  plot_cmd->add_option("--gt", plot_gt, "ground truth");
  plot_cmd->add_option("--out", plot_out, "output directory")->required();
  plot_cmd->add_option("--width", width, "image width");
  plot_cmd->add_option("--height", height, "image height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*track_cmd) return run_track(track);
    if (*eval_cmd) return run_eval(gt_path, hyp_path, gate, category);
    if (*sim_cmd) return run_simulate(scenario_path, spec, out_dir);
    if (*plot_cmd) return run_plot(plot_hyp, plot_gt, plot_out, width, height);
  } catch (const UsageError & e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const cltrack::ConfigError & e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kUsageError;
  } catch (const cltrack::ParseError & e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kDataError;
  } catch (const cltrack::DataError & e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
