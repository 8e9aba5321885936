// Command-line front end: every subcommand is a thin wrapper around one
// pipeline stage, `pipeline` chains them with caching.
#include <CLI11.hpp>
#include <iostream>

#include "bellpair/pipeline.hpp"

namespace {

bellpair::Region parse_region(const std::string& label, const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("region", "expected lo:hi in units of 1/a_L");
  return {label, std::stod(spec.substr(0, colon)), std::stod(spec.substr(colon + 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lattice-dressed spinor-BEC pair scattering and Bell metrics"};
  app.require_subcommand(1);

  bellpair::PipelineOptions opt;
  std::string region_a_spec, region_b_spec, stages_spec;
  double dt = 0, t_final_ms = 0, analyze_t_ms = 0, k0 = 0;
  int n_x = 0;
  bool frozen = false, no_symmetry = false;

  std::string scan_spec;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "config file")->required();
    cmd->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    cmd->add_flag("--force", opt.force, "ignore cached stage outputs");
    cmd->add_option("--dt", dt, "kernel time step, hbar/E_rec");
    cmd->add_option("--t-final", t_final_ms, "evolution time, ms");
    cmd->add_option("--n-x", n_x, "grid points");
    cmd->add_option("--k0", k0, "condensate momentum, 1/a_L");
    cmd->add_option("--region-a", region_a_spec, "analysis window A, lo:hi in 1/a_L");
    cmd->add_option("--region-b", region_b_spec, "analysis window B, lo:hi in 1/a_L");
    cmd->add_option("--analyze-t", analyze_t_ms, "kernel checkpoint time for analyze, ms");
    cmd->add_flag("--frozen-pump", frozen, "undepleted condensate (phase evolution only)");
    cmd->add_flag("--no-symmetry", no_symmetry, "evolve both spin sectors independently");
    cmd->add_option("--scan-k0", scan_spec, "match stage: scan k0 over lo:hi:count");
  };

  std::map<std::string, CLI::App*> cmds;
  for (const char* name : {"bands", "match", "evolve", "analyze", "metrics", "oracle"}) {
    CLI::App* c = app.add_subcommand(name, std::string("run the ") + name + " stage");
    add_common(c);
    cmds[name] = c;
  }
  CLI::App* pipe = app.add_subcommand("pipeline", "run stages in dependency order");
  add_common(pipe);
  pipe->add_option("--stages", stages_spec, "comma-separated stage list (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dt > 0) opt.dt = dt;
    if (t_final_ms > 0) opt.t_final_s = t_final_ms * 1e-3;
    if (analyze_t_ms > 0) opt.analyze_t_s = analyze_t_ms * 1e-3;
    if (n_x > 0) opt.n_x = n_x;
    if (k0 != 0) opt.k0 = k0;
    if (frozen) opt.frozen_pump = true;
    if (no_symmetry) opt.sector_symmetry = false;
    if (!region_a_spec.empty()) opt.region_a = parse_region("A", region_a_spec);
    if (!region_b_spec.empty()) opt.region_b = parse_region("B", region_b_spec);
    if (!scan_spec.empty()) {
      const auto c1 = scan_spec.find(':'), c2 = scan_spec.rfind(':');
      if (c1 == std::string::npos || c2 == c1)
        throw std::invalid_argument("--scan-k0 expects lo:hi:count");
      opt.scan_k0 = {{std::stod(scan_spec.substr(0, c1)),
                      std::stod(scan_spec.substr(c1 + 1, c2 - c1 - 1)),
                      std::stod(scan_spec.substr(c2 + 1))}};
    }

    for (const auto& [name, cmd] : cmds)
      if (cmd->parsed()) opt.stages = {name};
    if (pipe->parsed()) {
      opt.stages.clear();
      if (!stages_spec.empty()) {
        size_t pos = 0;
        while (pos != std::string::npos) {
          const auto comma = stages_spec.find(',', pos);
          opt.stages.push_back(stages_spec.substr(
              pos, comma == std::string::npos ? std::string::npos : comma - pos));
          pos = comma == std::string::npos ? comma : comma + 1;
        }
      }
    }

    const auto manifest = bellpair::run_pipeline(opt);
    for (const auto& [name, rec] : manifest.stages) {
      std::cout << name << ": " << rec.status;
      if (!rec.message.empty()) std::cout << " (" << rec.message << ")";
      std::cout << "\n";
    }
    return manifest.ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
