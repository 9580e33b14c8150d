#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stereorig/commands.hpp"

int main(int argc, char **argv) {
  using namespace stereorig::commands;

  CLI::App app{"Rotating stereo rig simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto *scan = app.add_subcommand("scan", "run a full autonomous scan");
  scan->add_option("--config", config_path, "run configuration")->required();
  scan->add_option("--out", out_dir, "output directory")->required();

  std::string plan_config;
  std::string plan_out;
  auto *plan = app.add_subcommand("plan", "print the rotation and pulse plan");
  plan->add_option("--config", plan_config, "run configuration")->required();
  plan->add_option("--out", plan_out, "directory for manifest.txt");

  std::string data_path;
  double rate = 5.0;
  auto *calibrate =
      app.add_subcommand("calibrate", "fit the actuation scale factor");
  calibrate->add_option("--data", data_path, "commanded/measured pairs")
      ->required();
  calibrate->add_option("--rate", rate, "nominal motion per pulse")
      ->capture_default_str();

  std::string left;
  std::string right;
  MatchOptions mopt;
  auto *match = app.add_subcommand("match", "match a stored stereo pair");
  match->add_option("--left", left, "left P5 image")->required();
  match->add_option("--right", right, "right P5 image")->required();
  match->add_option("--shift", mopt.shift_px, "compensation shift (px)")
      ->capture_default_str();
  match->add_option("--search", mopt.search_px, "residual search range (px)")
      ->capture_default_str();
  match->add_option("--window", mopt.window_px, "correlation window (odd)")
      ->capture_default_str();
  match->add_option("--baseline-mm", mopt.baseline_mm, "camera separation")
      ->capture_default_str();
  match->add_option("--focal-px", mopt.focal_px,
                    "focal length; default gives a 60 deg field of view");
  match->add_option("--out", mopt.out_dir, "output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  if (*scan)
    return cmd_scan(config_path, out_dir, std::cout, std::cerr);
  if (*plan)
    return cmd_plan(plan_config, plan_out, std::cout, std::cerr);
  if (*calibrate)
    return cmd_calibrate(data_path, rate, std::cout, std::cerr);
  if (*match)
    return cmd_match(left, right, mopt, std::cout, std::cerr);
  return kExitInput;
}
