#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bellpair/bell_metrics.hpp"
#include "bellpair/io.hpp"
#include "bellpair/phase_matching.hpp"

namespace bellpair {

struct PipelineOptions {
  std::string config_path;
  std::filesystem::path out_dir = "out";
  std::vector<std::string> stages;  // empty = all
  bool force = false;

  // command-line overrides folded into the effective config
  std::optional<double> dt;           // lattice units
  std::optional<double> t_final_s;
  std::optional<int> n_x;
  std::optional<double> k0;
  std::optional<bool> frozen_pump;
  std::optional<bool> sector_symmetry;
  std::optional<Region> region_a, region_b;
  std::optional<double> analyze_t_s;  // kernel checkpoint time for `analyze`
  std::optional<std::array<double, 3>> scan_k0;  // lo, hi, count: k0 scan in `match`
};

struct StageRecord {
  std::string status;  // "ok", "failed", "cached"
  std::string message;
  double wall_ms = 0;
  std::map<std::string, std::string> inputs;   // file -> digest
  std::map<std::string, std::string> outputs;  // file -> digest
};

struct RunManifest {
  std::string config_hash;
  std::map<std::string, StageRecord> stages;
  bool ok = true;
};

RunManifest run_pipeline(const PipelineOptions& opt);

// Effective parameters after applying the option overrides.
PhysicalParams effective_params(const PipelineOptions& opt);

// Resolved geometry of a run: tuned box, snapped condensate momentum,
// phase-matched momenta, analysis regions.
struct RunPlan {
  PhysicalParams params;
  BandStructure bands;
  Grid1d grid;
  double k0_run = 0;
  double detuning = 0;
  double n_box_atoms = 0;
  std::vector<ResonantPair> resonances;
  std::optional<Region> region_a, region_b;
};

RunPlan make_run_plan(const PipelineOptions& opt);

// Default analysis windows centered on the matched momenta ("A" is the
// negative-momentum cloud); throws if a window touches the condensate or a
// lattice translate of it.
std::pair<Region, Region> default_regions(const std::vector<ResonantPair>& res, double k0_run,
                                          double half_width_frac, double k_max);
void validate_regions(const Region& a, const Region& b, double k0_run, double k_max);

}  // namespace bellpair
