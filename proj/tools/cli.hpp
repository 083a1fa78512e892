#pragma once

// Command-line front end: track, eval, simulate, sweep, ablate-motion.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bytemot/bytemot.hpp"

namespace bytemot::cli {

namespace detail {

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

struct TrackArgs {
  std::string det, out, config_file, snapshot, mode, sensor, motion;
  std::optional<double> tau, gate_first, gate_second, alpha;
  std::optional<int> track_buffer;
  std::optional<bool> adaptive_r;
  bool single = false;
};

inline RawTrackerConfig raw_from_args(const TrackArgs& a) {
  RawTrackerConfig raw;
  if (!a.config_file.empty()) {
    auto in = open_in(a.config_file);
    raw = parse_config_text(in);
  }
  if (!a.mode.empty()) raw.mode = parse_mode(a.mode);
  if (!a.sensor.empty()) raw.sensor = parse_sensor(a.sensor);
  if (!a.motion.empty()) raw.motion = parse_motion(a.motion);
  if (a.tau) raw.tau = a.tau;
  if (a.gate_first) raw.gate_first = a.gate_first;
  if (a.gate_second) raw.gate_second = a.gate_second;
  if (a.alpha) raw.alpha = a.alpha;
  if (a.track_buffer) raw.track_buffer = a.track_buffer;
  if (a.adaptive_r) raw.adaptive_r = a.adaptive_r;
  if (a.single) raw.second_association = false;
  return raw;
}

inline int run_track(const TrackArgs& a, std::ostream& out) {
  const TrackerConfig cfg = validate_config(raw_from_args(a));
  out << "tau=" << format_number(cfg.tau) << " gate_first=" << format_number(cfg.gate_first.default_gate)
      << " gate_second=" << format_number(cfg.gate_second.default_gate)
      << " track_buffer=" << cfg.track_buffer << " motion=" << to_string(cfg.motion)
      << " alpha=" << format_number(cfg.alpha) << '\n';
  auto in = open_in(a.det);
  std::ostringstream text;
  if (cfg.mode == Mode::TwoD) {
    const auto result = run_sequence(parse_mot_detections(in), cfg);
    write_mot_results(result, text);
    out << "frames=" << result.frame_count << " records=" << result.records.size() << '\n';
  } else {
    const auto result = run_sequence(parse_det3d(in), cfg);
    write_tracks_3d(result, text);
    out << "frames=" << result.frame_count << " records=" << result.records.size() << '\n';
  }
  if (a.out == "-") {
    out << text.str();
  } else {
    auto f = open_out(a.out);
    f << text.str();
  }
  if (!a.snapshot.empty()) {
    auto f = open_out(a.snapshot);
    f << config_to_text(cfg);
  }
  return 0;
}

struct EvalArgs {
  std::string gt, pred, mode = "2d", metric = "all", report;
  std::optional<double> threshold;
  double min_recall = 0.0;
};

template <class Box>
int evaluate(const TrackOutput<Box>& gt, const TrackOutput<Box>& pred, const EvalArgs& a,
             std::ostream& out) {
  const double thr = a.threshold.value_or(default_match_threshold<Box>());
  nlohmann::json report;
  const bool all = a.metric == "all";
  if (all || a.metric == "clear") {
    const auto c = clear_mot(gt, pred, thr);
    out << to_key_value(c);
    report["clear"] = to_json(c);
  }
  if (all || a.metric == "idf1") {
    const auto r = identity_scores(gt, pred, thr);
    out << to_key_value(r);
    report["identity"] = to_json(r);
  }
  if (all || a.metric == "amota") {
    AmotaOptions opt;
    opt.min_recall = a.min_recall;
    const auto r = amota(gt, pred, opt, thr);
    out << to_key_value(r);
    report["amota"] = to_json(r);
  }
  if (!a.report.empty()) {
    auto f = open_out(a.report);
    f << report.dump(2) << '\n';
  }
  return 0;
}

inline int run_eval(const EvalArgs& a, std::ostream& out) {
  auto gin = open_in(a.gt);
  auto pin = open_in(a.pred);
  if (a.mode == "2d") return evaluate(parse_mot_tracks(gin), parse_mot_tracks(pin), a, out);
  return evaluate(parse_tracks_3d(gin), parse_tracks_3d(pin), a, out);
}

struct SimulateArgs {
  std::string preset = "occlusion", spec, gt_out, det_out;
  std::uint64_t seed = 0;
  int index = 0;
};

inline ScenarioSpec scenario_for(const SimulateArgs& a) {
  if (!a.spec.empty()) {
    auto in = open_in(a.spec);
    return scenario_from_json(nlohmann::json::parse(in));
  }
  if (a.preset == "occlusion") return occlusion_scenario();
  if (a.preset == "crossing") return crossing_scenario();
  if (a.preset == "benchmark") return benchmark_suite(a.index + 1, a.seed).back();
  if (a.preset == "motion3d") return motion_suite(a.index + 1, a.seed).back();
  throw std::runtime_error("unknown preset '" + a.preset + "'");
}

inline int run_simulate(const SimulateArgs& a, std::ostream& out) {
  const ScenarioSpec spec = scenario_for(a);
  auto gt = open_out(a.gt_out);
  auto det = open_out(a.det_out);
  if (spec.mode == Mode::TwoD) {
    const auto sc = generate_scenario<Box2D>(spec, a.seed);
    write_mot_results(sc.gt, gt);
    write_mot_detections(sc.detections, det);
    out << "frames=" << spec.duration << " gt_records=" << sc.gt.records.size() << '\n';
  } else {
    const auto sc = generate_scenario<Box3D>(spec, a.seed);
    write_tracks_3d(sc.gt, gt);
    write_det3d(sc.detections, det);
    out << "frames=" << spec.duration << " gt_records=" << sc.gt.records.size() << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::uint64_t seed = 7;
  int scenarios = 20;
  std::vector<double> taus{0.3, 0.4, 0.5, 0.6, 0.7};
};

inline int run_sweep(const SweepArgs& a, std::ostream& out) {
  const auto suite = generate_suite<Box2D>(benchmark_suite(a.scenarios, a.seed), a.seed);
  const SweepTable t = tau_sweep(suite, a.taus);
  out << std::fixed << std::setprecision(4);
  out << "tau     BYTE_MOTA  BYTE_IDF1  BYTE_IDS  BASE_MOTA  BASE_IDF1  BASE_IDS\n";
  for (const auto& r : t.rows) {
    out << std::setw(4) << std::setprecision(2) << r.tau << std::setprecision(4) << "  "
        << std::setw(9) << r.byte.mean_mota << "  " << std::setw(9) << r.byte.mean_idf1 << "  "
        << std::setw(8) << r.byte.ids << "  " << std::setw(9) << r.baseline.mean_mota << "  "
        << std::setw(9) << r.baseline.mean_idf1 << "  " << std::setw(8) << r.baseline.ids << '\n';
  }
  out << "MOTA spread: BYTE=" << t.byte_mota_spread() << " baseline=" << t.baseline_mota_spread() << '\n';
  return 0;
}

struct AblateArgs {
  std::uint64_t seed = 11;
  int scenarios = 10;
};

inline int run_ablate(const AblateArgs& a, std::ostream& out) {
  const auto suite = generate_suite<Box3D>(motion_suite(a.scenarios, a.seed), a.seed);
  out << std::fixed << std::setprecision(4);
  out << "motion                    AMOTA    MOTA     IDS\n";
  for (const auto& r : motion_ablation(suite)) {
    std::string name = to_string(r.strategy) + (r.adaptive_r ? "+adaptive_r" : "");
    name.resize(24, ' ');
    out << name << "  " << r.mean_amota << "  " << r.score.mean_mota << "  " << std::setw(5)
        << r.score.ids << '\n';
  }
  return 0;
}

}  // namespace detail

/// Runs one command line; returns the process exit status.
inline int cli_dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
  CLI::App app{"bytemot: two-pass multi-object tracking, evaluation and synthetic benchmarks"};
  app.require_subcommand(1);

  detail::TrackArgs ta;
  auto* track = app.add_subcommand("track", "Track detections and write trajectories");
  track->add_option("--det", ta.det, "Detection file (MOT text in 2D, 3D detection text in 3D)")->required();
  track->add_option("--out", ta.out, "Output track file, '-' for stdout")->required();
  track->add_option("--config", ta.config_file, "Config file (key = value); flags override it");
  track->add_option("--snapshot", ta.snapshot, "Write the resolved config here");
  track->add_option("--mode", ta.mode, "2d or 3d")->check(CLI::IsMember({"2d", "3d"}));
  track->add_option("--sensor", ta.sensor, "camera or lidar")->check(CLI::IsMember({"camera", "lidar"}));
  track->add_option("--tau", ta.tau, "High/low detection score split");
  track->add_option("--gate-first", ta.gate_first, "Similarity gate of the first association");
  track->add_option("--gate-second", ta.gate_second, "Similarity gate of the second association");
  track->add_option("--track-buffer", ta.track_buffer, "Frames a lost track is kept");
  track->add_option("--alpha", ta.alpha, "Scale of the confidence-adaptive measurement noise");
  track->add_option("--adaptive-r", ta.adaptive_r, "Scale measurement noise by detection score (true/false)");
  track->add_option("--motion", ta.motion, "kf, dv or complementary")
      ->check(CLI::IsMember({"kf", "dv", "complementary"}));
  track->add_flag("--single-association", ta.single, "Disable the low-score pass (baseline)");

  detail::EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--gt", ea.gt, "Ground-truth track file")->required();
  eval->add_option("--pred", ea.pred, "Predicted track file")->required();
  eval->add_option("--mode", ea.mode, "2d or 3d")->check(CLI::IsMember({"2d", "3d"}));
  eval->add_option("--metric", ea.metric, "clear, idf1, amota or all")
      ->check(CLI::IsMember({"clear", "idf1", "amota", "all"}));
  eval->add_option("--threshold", ea.threshold, "Match gate: IoU in 2D, center distance (m) in 3D");
  eval->add_option("--min-recall", ea.min_recall, "Drop AMOTA recall points below this");
  eval->add_option("--report", ea.report, "Write a JSON report here");

  detail::SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic scenario");
  sim->add_option("--preset", sa.preset, "occlusion, crossing, benchmark or motion3d")
      ->check(CLI::IsMember({"occlusion", "crossing", "benchmark", "motion3d"}));
  sim->add_option("--spec", sa.spec, "Scenario JSON file (overrides --preset)");
  sim->add_option("--seed", sa.seed, "Random seed");
  sim->add_option("--index", sa.index, "Scenario index within a suite preset");
  sim->add_option("--gt-out", sa.gt_out, "Ground-truth output file")->required();
  sim->add_option("--det-out", sa.det_out, "Detection output file")->required();

  detail::SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Score threshold sweep, two-pass vs single association");
  sweep->add_option("--seed", wa.seed, "Suite seed");
  sweep->add_option("--scenarios", wa.scenarios, "Number of scenarios")->check(CLI::PositiveNumber);
  sweep->add_option("--taus", wa.taus, "Thresholds to sweep")->delimiter(',');

  detail::AblateArgs aa;
  auto* ablate = app.add_subcommand("ablate-motion", "Compare 3D motion strategies");
  ablate->add_option("--seed", aa.seed, "Suite seed");
  ablate->add_option("--scenarios", aa.scenarios, "Number of scenarios")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*track) return detail::run_track(ta, out);
    if (*eval) return detail::run_eval(ea, out);
    if (*sim) return detail::run_simulate(sa, out);
    if (*sweep) return detail::run_sweep(wa, out);
    if (*ablate) return detail::run_ablate(aa, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace bytemot::cli
