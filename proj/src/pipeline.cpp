#include "bellpair/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <nlohmann/json.hpp>

#include "bellpair/oracles.hpp"

namespace bellpair {

namespace fs = std::filesystem;
using nlohmann::json;

PhysicalParams effective_params(const PipelineOptions& opt) {
  PhysicalParams p = load_config(opt.config_path);
  if (opt.dt) p.dt_erec = *opt.dt;
  if (opt.t_final_s) p.evolution_time_s = *opt.t_final_s;
  if (opt.n_x) p.n_x = *opt.n_x;
  if (opt.k0) p.k0_alat = *opt.k0;
  if (opt.frozen_pump) p.frozen_pump = *opt.frozen_pump;
  if (opt.sector_symmetry) p.sector_symmetry = *opt.sector_symmetry;
  p.finalize();
  return p;
}

std::pair<Region, Region> default_regions(const std::vector<ResonantPair>& res, double k0_run,
                                          double half_width_frac, double k_max) {
  if (res.empty())
    throw std::runtime_error("no phase-matched momenta; pass --region-a/--region-b explicitly");
  const auto& r = res.front();
  const double hw = half_width_frac * std::abs(r.k1 - r.k2);
  Region a{"A", std::min(r.k1, r.k2) - hw, std::min(r.k1, r.k2) + hw};
  Region b{"B", std::max(r.k1, r.k2) - hw, std::max(r.k1, r.k2) + hw};
  validate_regions(a, b, k0_run, k_max);
  return {a, b};
}

void validate_regions(const Region& a, const Region& b, double k0_run, double k_max) {
  if (!(a.k_hi < b.k_lo || b.k_hi < a.k_lo))
    throw std::runtime_error("regions A and B must be disjoint");
  for (const Region* r : {&a, &b}) {
    const int jmax = static_cast<int>(std::ceil((k_max + std::abs(k0_run)) / (2.0 * M_PI))) + 1;
    for (int j = -jmax; j <= jmax; ++j) {
      const double kc = k0_run + 2.0 * M_PI * j;
      if (r->contains(kc))
        throw std::runtime_error("region " + r->label +
                                 " contains the condensate momentum or a lattice translate");
    }
  }
}

RunPlan make_run_plan(const PipelineOptions& opt) {
  RunPlan plan;
  plan.params = effective_params(opt);
  const PhysicalParams& p = plan.params;
  plan.bands = solve_bands(p);

  double box = std::round(p.box_alat);
  double k0_run;
  if (p.geometry == Geometry::Slab && p.tune_box) {
    const auto c = effective_1d_couplings(p);
    const double c1n = c.g1_lat * slab_density_alat(p);
    const auto tuned = tune_box(plan.bands, p.k0_alat, c1n, p.box_alat, p.k0_snap_tol);
    box = tuned.box;
    k0_run = tuned.k0_run;
    plan.detuning = tuned.detuning;
  } else {
    Grid1d pre{p.n_x, box};
    k0_run = snap_momentum(pre, p.k0_alat);
  }
  plan.grid = Grid1d{p.n_x, box};
  if (plan.grid.dx() > 1.0 / 16.0 + 1e-12)
    throw std::runtime_error("grid does not resolve the lattice: need n_x >= 16 * box");
  plan.k0_run = k0_run;
  plan.n_box_atoms = box_atoms(p, plan.grid);
  plan.resonances = find_resonances(plan.bands, k0_run);

  const double k_grid_max = M_PI * plan.grid.n / plan.grid.box;
  if (opt.region_a && opt.region_b) {
    validate_regions(*opt.region_a, *opt.region_b, k0_run, k_grid_max);
    plan.region_a = *opt.region_a;
    plan.region_b = *opt.region_b;
  } else if (!plan.resonances.empty()) {
    auto [a, b] = default_regions(plan.resonances, k0_run, p.region_half_width_frac, k_grid_max);
    plan.region_a = a;
    plan.region_b = b;
  }
  return plan;
}

namespace {

// Writes outputs under name.partial, renamed on commit; failures leave the
// partials behind.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  fs::path staged(const std::string& name) {
    names_.push_back(name);
    return dir_ / (name + ".partial");
  }
  void commit() {
    for (const auto& n : names_) {
      fs::rename(dir_ / (n + ".partial"), dir_ / n);
    }
    committed_ = true;
  }
  const std::vector<std::string>& names() const { return names_; }
  bool committed() const { return committed_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

std::string time_tag(double t_s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08ldus", std::lround(t_s * 1e6));
  return buf;
}

json region_json(const Region& r) {
  return json{{"label", r.label}, {"k_lo_alat", r.k_lo}, {"k_hi_alat", r.k_hi}};
}

Region region_from_json(const json& j) {
  return Region{j.at("label").get<std::string>(), j.at("k_lo_alat").get<double>(),
                j.at("k_hi_alat").get<double>()};
}

struct StageContext {
  const PipelineOptions& opt;
  fs::path dir;
  std::string config_hash;
};

// ---- stage bodies ----

void stage_bands(const StageContext& ctx, const RunPlan& plan, StageRecord& rec) {
  OutputSet out(ctx.dir);
  const auto& b = plan.bands;
  std::vector<std::string> cols{"k_alat"};
  for (int j = 0; j < b.n_bands(); ++j) cols.push_back("E" + std::to_string(j) + "_erec");
  CsvWriter csv(cols);
  for (int i = 0; i < b.n_k(); ++i) {
    std::vector<double> row{b.k[i]};
    for (int j = 0; j < b.n_bands(); ++j) row.push_back(b.energy(i, j));
    csv.row(row);
  }
  csv.write(out.staged("bands.csv"));
  std::vector<PlotSeries> series;
  for (int j = 0; j < b.n_bands(); ++j)
    series.push_back({"k_alat", "E" + std::to_string(j) + "_erec", "band " + std::to_string(j)});
  write_plot_descriptor(out.staged("bands.plot.json"), "Lattice dispersion", "k a_L", "E / E_rec",
                        "bands.csv", series);
  out.commit();
  for (const auto& n : out.names()) rec.outputs[n] = sha256_file(ctx.dir / n);
}

void stage_match(const StageContext& ctx, const RunPlan& plan, StageRecord& rec) {
  OutputSet out(ctx.dir);
  const auto res = find_resonances(plan.bands, plan.params.k0_alat);
  json j;
  j["k0_alat"] = plan.params.k0_alat;
  j["roots"] = json::array();
  for (const auto& r : res)
    j["roots"].push_back({{"k1_alat", r.k1},
                          {"k2_alat", r.k2},
                          {"q_alat", r.q},
                          {"residual_erec", r.residual}});
  std::ofstream f(out.staged("match.json"));
  f << j.dump(2) << "\n";
  f.close();

  // optional scan over the condensate momentum: where does pair emission
  // switch on?
  if (ctx.opt.scan_k0) {
    const auto [lo, hi, count] = *ctx.opt.scan_k0;
    CsvWriter scan({"k0_alat", "n_roots", "k1_alat", "k2_alat"});
    const int n = std::max(2, static_cast<int>(count));
    for (int i = 0; i < n; ++i) {
      const double k0 = lo + (hi - lo) * i / (n - 1);
      const auto rr = find_resonances(plan.bands, k0);
      scan.row({k0, static_cast<double>(rr.size()), rr.empty() ? 0.0 : rr.front().k1,
                rr.empty() ? 0.0 : rr.front().k2});
    }
    scan.write(out.staged("match_scan.csv"));
    write_plot_descriptor(out.staged("match_scan.plot.json"), "Resonant momenta vs k0", "k0 a_L",
                          "k a_L", "match_scan.csv",
                          {{"k0_alat", "k1_alat", "k1"}, {"k0_alat", "k2_alat", "k2"}});
  }
  out.commit();
  for (const auto& n : out.names()) rec.outputs[n] = sha256_file(ctx.dir / n);
}

void stage_evolve(const StageContext& ctx, const RunPlan& plan, StageRecord& rec) {
  OutputSet out(ctx.dir);
  const PhysicalParams& p = plan.params;
  const Grid1d& grid = plan.grid;
  MeanFieldProblem prob = make_problem(p, grid);

  CondensateField gs = ground_state(prob, plan.n_box_atoms);
  // boost at t = 0
  CondensateField boosted = gs;
  for (int j = 0; j < grid.n; ++j)
    boosted.phi(j) *= std::polar(1.0, plan.k0_run * grid.x(j));
  boosted.t = 0;

  std::unique_ptr<CondensateProvider> pump;
  if (p.frozen_pump)
    pump = std::make_unique<FrozenPumpProvider>(prob, boosted);
  else
    pump = std::make_unique<MeanFieldProvider>(prob, boosted);

  std::vector<double> times;
  for (double t = p.snapshot_every; t < p.t_final - 1e-9; t += p.snapshot_every)
    times.push_back(t);
  times.push_back(p.t_final);

  if (!plan.region_a || !plan.region_b)
    throw std::runtime_error("evolve: no analysis regions available");
  const std::vector<Region> regions{*plan.region_a, *plan.region_b};

  // kernel checkpoints at the analysis time and the end of the run
  double analyze_t = ctx.opt.analyze_t_s ? *ctx.opt.analyze_t_s / p.t_unit_s
                                         : std::min(0.7e-3 / p.t_unit_s, p.t_final);
  double best = times.front();
  for (double t : times)
    if (std::abs(t - analyze_t) < std::abs(best - analyze_t)) best = t;
  analyze_t = best;

  json run;
  run["snapshots"] = json::array();
  run["symplectic_residuals"] = json::array();

  BogoliubovKernels kernels = initial_kernels(grid, p.sector_symmetry);
  KernelEvolveOptions kopt;
  kopt.dt = p.dt_erec;
  const double norm0 = boosted.norm();
  std::vector<std::string> state_files;
  int snap_count = 0;
  const int residual_stride = std::max<int>(1, static_cast<int>(times.size()) / 6);
  kopt.on_snapshot = [&](const BogoliubovKernels& k) {
    StateSnapshot snap;
    snap.state = build_state(k, regions);
    snap.region_a = *plan.region_a;
    snap.region_b = *plan.region_b;
    const std::string name = "state_t" + time_tag(k.t * p.t_unit_s) + ".bin";
    save_state(out.staged(name), snap);
    state_files.push_back(name);
    if (std::abs(k.t - analyze_t) < 1e-9)
      save_kernels(out.staged("kernels_analysis.bin"), k);
    const bool last = std::abs(k.t - p.t_final) < 1e-9;
    if (last) save_kernels(out.staged("kernels_final.bin"), k);
    if (snap_count % residual_stride == 0 || last) {
      const double r = symplectic_residual(k);
      if (r > kopt.symplectic_tol)
        throw std::runtime_error("evolve: symplectic residual " + std::to_string(r) +
                                 " exceeds tolerance at t=" + std::to_string(k.t) +
                                 "; reduce dt");
      run["symplectic_residuals"].push_back({{"t_s", k.t * p.t_unit_s}, {"value", r}});
    }
    ++snap_count;
    run["snapshots"].push_back({{"t_s", k.t * p.t_unit_s}, {"file", name}});
  };
  evolve_kernels(kernels, prob, *pump, times, kopt);

  // mean-field norm sanity on the co-evolved pump, plus final-pump exports
  if (auto* mf = dynamic_cast<MeanFieldProvider*>(pump.get())) {
    const double drift = std::abs(mf->state().norm() - norm0) / norm0;
    if (drift > 1e-6)
      throw std::runtime_error("evolve: condensate norm drift " + std::to_string(drift));
    save_field(out.staged("phi_final.bin"), mf->state());
    CsvWriter dens({"x_alat", "density_per_alat"});
    for (int j = 0; j < grid.n; ++j)
      dens.row({grid.x(j), std::norm(mf->state().phi(j))});
    dens.write(out.staged("evolve_density.csv"));
    write_plot_descriptor(out.staged("evolve_density.plot.json"), "Condensate density at t_final",
                          "x / a_L", "n(x) a_L", "evolve_density.csv",
                          {{"x_alat", "density_per_alat", "density"}});

    Eigen::VectorXcd ph = mf->state().phi;
    Fft fft(grid.n);
    fft.forward(ph.data());
    CsvWriter mom({"k_alat", "momentum_density"});
    for (int s = 0; s < grid.n; ++s) {
      const int m = (s + grid.n / 2) % grid.n;
      mom.row({fft_momentum(m, grid.n, grid.box),
               std::norm(ph(m)) * grid.dx() * grid.dx() / grid.box});
    }
    mom.write(out.staged("evolve_momentum.csv"));
    write_plot_descriptor(out.staged("evolve_momentum.plot.json"),
                          "Condensate momentum density at t_final", "k a_L", "|phi(k)|^2",
                          "evolve_momentum.csv", {{"k_alat", "momentum_density", "condensate"}});
  }

  run["box_alat"] = grid.box;
  run["n_x"] = grid.n;
  run["k0_requested_alat"] = p.k0_alat;
  run["k0_run_alat"] = plan.k0_run;
  run["tuning_detuning_erec"] = plan.detuning;
  run["box_atoms"] = plan.n_box_atoms;
  run["t_final_s"] = p.evolution_time_s;
  run["dt_erec"] = p.dt_erec;
  run["frozen_pump"] = p.frozen_pump;
  run["sector_symmetry"] = p.sector_symmetry;
  run["analysis_time_s"] = analyze_t * p.t_unit_s;
  run["region_a"] = region_json(*plan.region_a);
  run["region_b"] = region_json(*plan.region_b);
  run["resonances"] = json::array();
  for (const auto& r : plan.resonances)
    run["resonances"].push_back({{"k1_alat", r.k1}, {"k2_alat", r.k2}});
  {
    std::ofstream f(out.staged("evolve_run.json"));
    f << run.dump(2) << "\n";
  }
  out.commit();
  for (const auto& n : out.names()) rec.outputs[n] = sha256_file(ctx.dir / n);
}

json load_run_meta(const fs::path& dir) {
  std::ifstream f(dir / "evolve_run.json");
  if (!f) throw std::runtime_error("missing evolve_run.json; run the evolve stage first");
  json j;
  f >> j;
  return j;
}

void stage_analyze(const StageContext& ctx, const RunPlan& plan, StageRecord& rec) {
  const json run = load_run_meta(ctx.dir);
  rec.inputs["evolve_run.json"] = sha256_file(ctx.dir / "evolve_run.json");
  rec.inputs["kernels_analysis.bin"] = sha256_file(ctx.dir / "kernels_analysis.bin");
  const BogoliubovKernels kernels = load_kernels(ctx.dir / "kernels_analysis.bin");
  const Region ra = ctx.opt.region_a.value_or(region_from_json(run.at("region_a")));
  const Region rb = ctx.opt.region_b.value_or(region_from_json(run.at("region_b")));

  OutputSet out(ctx.dir);
  GaussianState st = build_state(kernels);

  CsvWriter dens({"k_alat", "occupation_up", "density_up"});
  for (int i = 0; i < st.n_modes(); ++i) {
    const double occ = st.g_spin(Spin::Up, Spin::Up, i, i).real();
    dens.row({st.k[i], occ, occ * st.box});
  }
  dens.write(out.staged("analyze_density.csv"));
  write_plot_descriptor(out.staged("analyze_density.plot.json"),
                        "Scattered-atom momentum density", "k a_L", "occupation",
                        "analyze_density.csv", {{"k_alat", "occupation_up", "n_up(k)"}});

  // g2 maps with k' fixed at each cloud's density peak
  auto peak_in = [&](const Region& r) {
    int best = -1;
    for (int i = 0; i < st.n_modes(); ++i)
      if (r.contains(st.k[i]) &&
          (best < 0 || st.diag_plus(i) > st.diag_plus(best)))
        best = i;
    if (best < 0) throw std::runtime_error("analyze: region holds no grid modes");
    return best;
  };
  for (const auto& [region, tag] : {std::pair{ra, std::string("a")}, {rb, std::string("b")}}) {
    const int ip = peak_in(region);
    CsvWriter g2map({"k_alat", "g2_local_upup", "g2_btb_updn"});
    for (int i = 0; i < st.n_modes(); ++i) {
      const double gkk = st.g_spin(Spin::Up, Spin::Up, i, i).real();
      const double gpp = st.g_spin(Spin::Up, Spin::Up, ip, ip).real();
      const double gdd = st.g_spin(Spin::Down, Spin::Down, ip, ip).real();
      double local = 0, btb = 0;
      if (gkk > 1e-300 && gpp > 1e-300) {
        const cxd g2l = second_order(st, {Spin::Up, Spin::Up, Spin::Up, Spin::Up},
                                     {st.k[i], st.k[ip], st.k[ip], st.k[i]});
        local = g2l.real() / (gkk * gpp);
        const cxd g2b = second_order(st, {Spin::Up, Spin::Down, Spin::Down, Spin::Up},
                                     {st.k[i], st.k[ip], st.k[ip], st.k[i]});
        btb = g2b.real() / (gkk * gdd);
      }
      g2map.row({st.k[i], local, btb});
    }
    const std::string name = "g2_fixed_" + tag + ".csv";
    g2map.write(out.staged(name));
    write_plot_descriptor(out.staged("g2_fixed_" + tag + ".plot.json"),
                          "Second-order coherence, k' fixed in " + region.label, "k a_L", "g2",
                          name,
                          {{"k_alat", "g2_local_upup", "local"},
                           {"k_alat", "g2_btb_updn", "back-to-back"}});
  }
  out.commit();
  for (const auto& n : out.names()) rec.outputs[n] = sha256_file(ctx.dir / n);
}

void stage_metrics(const StageContext& ctx, const RunPlan& plan, StageRecord& rec) {
  const json run = load_run_meta(ctx.dir);
  rec.inputs["evolve_run.json"] = sha256_file(ctx.dir / "evolve_run.json");

  OutputSet out(ctx.dir);
  CsvWriter csv({"t_s", "bell_over_2", "inv_2ehz", "qfi_over_shot", "g2", "n_a", "n_b"});
  CsvWriter extra({"t_s", "bell", "bell_via_g2", "chsh_grid", "theta", "theta_p", "phi", "phi_p",
                   "e_hz", "qfi", "shot_noise"});
  for (const auto& snap : run.at("snapshots")) {
    const std::string file = snap.at("file").get<std::string>();
    rec.inputs[file] = sha256_file(ctx.dir / file);
    StateSnapshot s = load_state(ctx.dir / file);
    const Region ra = ctx.opt.region_a.value_or(s.region_a);
    const Region rb = ctx.opt.region_b.value_or(s.region_b);
    MetricsSample m = metrics_sample(s.state, ra, rb);
    const double t_s = snap.at("t_s").get<double>();
    const double inv2ehz = m.e_hz_defined ? 1.0 / (2.0 * m.e_hz) : 0.0;
    const double qfi_ratio = m.shot_noise > 0 ? m.fq / m.shot_noise : 0.0;
    csv.row({t_s, m.bell / 2.0, inv2ehz, qfi_ratio, m.populated ? m.g2 : 0.0, m.atoms_a,
             m.atoms_b});
    ChshResult ch;
    if (m.populated) ch = chsh_over_angles(s.state, ra, rb, M_PI / 64.0);
    extra.row({t_s, m.bell, m.bell_via_g2, ch.value, ch.theta, ch.theta_p, ch.phi, ch.phi_p,
               m.e_hz_defined ? m.e_hz : 0.0, m.fq, m.shot_noise});
  }
  csv.write(out.staged("metrics.csv"));
  write_plot_descriptor(
      out.staged("metrics.plot.json"), "Non-classicality metrics", "t [s]", "normalized value",
      "metrics.csv",
      {{"t_s", "bell_over_2", "B/2"}, {"t_s", "inv_2ehz", "1/(2 E_HZ)"},
       {"t_s", "qfi_over_shot", "F_q / <N_A+N_B>"}});
  extra.write(out.staged("metrics_extra.csv"));
  write_plot_descriptor(out.staged("metrics_extra.plot.json"), "Bell metrics detail", "t [s]",
                        "value", "metrics_extra.csv", {{"t_s", "bell", "B_max"}});
  out.commit();
  for (const auto& n : out.names()) rec.outputs[n] = sha256_file(ctx.dir / n);
}

// `oracle` stage: a few-mode sanity sweep, CSV echo only.
void stage_oracle(const StageContext& ctx, const RunPlan&, StageRecord& rec) {
  OutputSet out(ctx.dir);
  CsvWriter csv({"n_mean", "g2_fock", "g2_analytic", "bell", "e_hz", "qfi_over_shot"});
  for (double n : {0.05, 0.1, 0.25, 0.3, 0.5, 1.0}) {
    const double r = std::asinh(std::sqrt(n));
    FockOracle oracle(r);
    GaussianState st = oracle.matching_state();
    const Region ra = FockOracle::region_a(), rb = FockOracle::region_b();
    const auto bm = bell_max(st, ra, rb);
    const auto hz = hillery_zubairy(st, ra, rb);
    const auto q = qfi(st, ra, rb);
    csv.row({n, oracle.g2(), 2.0 + 1.0 / n, bm.value, hz.defined ? hz.value : 0.0,
             q.shot_noise > 0 ? q.fq / q.shot_noise : 0.0});
  }
  csv.write(out.staged("oracle.csv"));
  write_plot_descriptor(out.staged("oracle.plot.json"), "Two-mode-squeezed oracle sweep",
                        "mean occupation", "value", "oracle.csv",
                        {{"n_mean", "g2_fock", "g2"}, {"n_mean", "bell", "B_max"}});
  out.commit();
  for (const auto& n : out.names()) rec.outputs[n] = sha256_file(ctx.dir / n);
}

// ---- manifest handling ----

json manifest_to_json(const RunManifest& m) {
  json j;
  j["config_hash"] = m.config_hash;
  j["tool"] = {{"name", "bellpair"}, {"version", "0.1.0"}};
  json stages = json::object();
  for (const auto& [name, rec] : m.stages) {
    json r;
    r["status"] = rec.status;
    if (!rec.message.empty()) r["message"] = rec.message;
    r["wall_ms"] = rec.wall_ms;
    r["inputs"] = rec.inputs;
    r["outputs"] = rec.outputs;
    stages[name] = r;
  }
  j["stages"] = stages;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.config_hash = j.value("config_hash", "");
  if (j.contains("stages"))
    for (auto it = j.at("stages").begin(); it != j.at("stages").end(); ++it) {
      StageRecord r;
      r.status = it.value().value("status", "");
      r.message = it.value().value("message", "");
      r.wall_ms = it.value().value("wall_ms", 0.0);
      if (it.value().contains("inputs"))
        r.inputs = it.value().at("inputs").get<std::map<std::string, std::string>>();
      if (it.value().contains("outputs"))
        r.outputs = it.value().at("outputs").get<std::map<std::string, std::string>>();
      m.stages[it.key()] = r;
    }
  return m;
}

bool cache_valid(const fs::path& dir, const StageRecord& rec) {
  if (rec.status != "ok" && rec.status != "cached") return false;
  for (const auto& [file, digest] : rec.inputs) {
    if (file.starts_with("<")) continue;  // pseudo-inputs tracked elsewhere
    if (!fs::exists(dir / file) || sha256_file(dir / file) != digest) return false;
  }
  for (const auto& [file, digest] : rec.outputs) {
    if (!fs::exists(dir / file) || sha256_file(dir / file) != digest) return false;
  }
  return true;
}

}  // namespace

RunManifest run_pipeline(const PipelineOptions& opt) {
  fs::create_directories(opt.out_dir);
  const std::vector<std::string> all_stages{"bands", "match", "evolve", "analyze", "metrics",
                                            "oracle"};
  std::vector<std::string> wanted = opt.stages;
  if (wanted.empty()) wanted = {"bands", "match", "evolve", "analyze", "metrics"};
  for (const auto& s : wanted)
    if (std::find(all_stages.begin(), all_stages.end(), s) == all_stages.end())
      throw std::invalid_argument("unknown stage: " + s);

  RunPlan plan = make_run_plan(opt);
  const std::string config_hash =
      sha256_bytes(serialize(plan.params) +
                   (opt.region_a ? "|ra:" + std::to_string(opt.region_a->k_lo) + ":" +
                                       std::to_string(opt.region_a->k_hi)
                                 : "") +
                   (opt.region_b ? "|rb:" + std::to_string(opt.region_b->k_lo) + ":" +
                                       std::to_string(opt.region_b->k_hi)
                                 : ""));

  RunManifest manifest;
  const fs::path manifest_path = opt.out_dir / "run_manifest.json";
  if (fs::exists(manifest_path)) {
    std::ifstream f(manifest_path);
    json j;
    f >> j;
    manifest = manifest_from_json(j);
  }
  const bool config_changed = manifest.config_hash != config_hash;
  manifest.config_hash = config_hash;

  StageContext ctx{opt, opt.out_dir, config_hash};
  using StageFn = void (*)(const StageContext&, const RunPlan&, StageRecord&);
  const std::map<std::string, StageFn> bodies{
      {"bands", stage_bands},     {"match", stage_match},     {"evolve", stage_evolve},
      {"analyze", stage_analyze}, {"metrics", stage_metrics}, {"oracle", stage_oracle}};

  for (const auto& name : all_stages) {
    if (std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    auto it = manifest.stages.find(name);
    if (!opt.force && !config_changed && it != manifest.stages.end() &&
        cache_valid(opt.out_dir, it->second)) {
      it->second.status = "cached";
      continue;
    }
    StageRecord rec;
    rec.inputs["<config>"] = config_hash;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      bodies.at(name)(ctx, plan, rec);
      rec.status = "ok";
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.message = e.what();
      manifest.ok = false;
    }
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    manifest.stages[name] = rec;
    if (rec.status == "failed") break;
  }

  std::ofstream f(manifest_path);
  f << manifest_to_json(manifest).dump(2) << "\n";
  return manifest;
}

}  // namespace bellpair
