#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bellpair/pipeline.hpp"

using namespace bellpair;
namespace fs = std::filesystem;

namespace {

// Helium constants on a small grid with a short clock, for fast smoke runs.
fs::path write_small_config(const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path p = dir / "small.conf";
  std::ofstream f(p);
  f << R"(atom_mass_kg = 6.6464731e-27
n_atoms = 10000
a_bar_m = 6.77e-9
delta_a_m = 0.73e-9
nu_x_hz = 1500
nu_y_hz = 1500
nu_z_hz = 6.5
lattice_depth_erec = 0.725
k_rec_per_m = 5.9e6
k0_alat = 2.04
evolution_time_s = 5.0e-5
geometry = slab
n_x = 256
box_alat = 16
dt_erec = 2e-2
snapshot_every_s = 2.0e-5
)";
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("single-stage run emits one csv and a manifest") {
  const fs::path base = fs::temp_directory_path() / "bellpair_test_bands";
  fs::remove_all(base);
  PipelineOptions opt;
  opt.config_path = write_small_config(base).string();
  opt.out_dir = base / "out";
  opt.stages = {"bands"};
  const auto m = run_pipeline(opt);
  CHECK(m.ok);
  CHECK(m.stages.at("bands").status == "ok");
  CHECK(fs::exists(opt.out_dir / "bands.csv"));
  CHECK(fs::exists(opt.out_dir / "bands.plot.json"));
  CHECK(fs::exists(opt.out_dir / "run_manifest.json"));
}

TEST_CASE("full pipeline runs, caches, and is bit-deterministic") {
  const fs::path base = fs::temp_directory_path() / "bellpair_test_pipe";
  fs::remove_all(base);
  PipelineOptions opt;
  opt.config_path = write_small_config(base).string();
  opt.out_dir = base / "out1";
  const auto m1 = run_pipeline(opt);
  REQUIRE(m1.ok);
  for (const char* s : {"bands", "match", "evolve", "analyze", "metrics"})
    CHECK(m1.stages.at(s).status == "ok");
  CHECK(fs::exists(opt.out_dir / "metrics.csv"));
  CHECK(fs::exists(opt.out_dir / "metrics_extra.csv"));
  CHECK(fs::exists(opt.out_dir / "analyze_density.csv"));
  CHECK(fs::exists(opt.out_dir / "g2_fixed_a.csv"));
  CHECK(fs::exists(opt.out_dir / "evolve_run.json"));

  // rerun unchanged: every stage is a cache hit
  const auto m2 = run_pipeline(opt);
  REQUIRE(m2.ok);
  for (const char* s : {"bands", "match", "evolve", "analyze", "metrics"})
    CHECK(m2.stages.at(s).status == "cached");

  // independent rerun in a fresh directory: bit-identical csv bodies
  PipelineOptions opt2 = opt;
  opt2.out_dir = base / "out2";
  const auto m3 = run_pipeline(opt2);
  REQUIRE(m3.ok);
  for (const char* f : {"bands.csv", "match.json", "metrics.csv", "metrics_extra.csv",
                        "analyze_density.csv", "evolve_density.csv"})
    CHECK(slurp(opt.out_dir / f) == slurp(opt2.out_dir / f));

  // forced rerun executes again
  PipelineOptions opt3 = opt;
  opt3.force = true;
  opt3.stages = {"bands"};
  const auto m4 = run_pipeline(opt3);
  CHECK(m4.stages.at("bands").status == "ok");
}

TEST_CASE("stage failure is recorded and partial outputs are kept") {
  const fs::path base = fs::temp_directory_path() / "bellpair_test_fail";
  fs::remove_all(base);
  PipelineOptions opt;
  opt.config_path = write_small_config(base).string();
  opt.out_dir = base / "out";
  opt.stages = {"analyze"};  // inputs missing: evolve never ran
  const auto m = run_pipeline(opt);
  CHECK(!m.ok);
  CHECK(m.stages.at("analyze").status == "failed");
  CHECK(!m.stages.at("analyze").message.empty());
}

TEST_CASE("regions validate against the condensate and its translates") {
  CHECK_THROWS(validate_regions({"A", -3.5, -2.0}, {"B", 0.2, 1.5}, -2.5, 20.0));
  CHECK_THROWS(validate_regions({"A", -1.0, 0.5}, {"B", 0.2, 1.5}, 10.0, 20.0));
  // condensate translate k0 - 2 pi inside A
  CHECK_THROWS(validate_regions({"A", -4.4, -4.0}, {"B", 0.2, 1.5}, 2.04, 20.0));
  validate_regions({"A", -3.7, -2.0}, {"B", -0.2, 1.5}, 2.04, 20.0);
}

TEST_CASE("match scan mode emits the threshold sweep") {
  const fs::path base = fs::temp_directory_path() / "bellpair_test_scan";
  fs::remove_all(base);
  PipelineOptions opt;
  opt.config_path = write_small_config(base).string();
  opt.out_dir = base / "out";
  opt.stages = {"match"};
  opt.scan_k0 = {{0.4, 2.4, 21}};
  const auto m = run_pipeline(opt);
  CHECK(m.ok);
  REQUIRE(fs::exists(opt.out_dir / "match_scan.csv"));
  // below threshold no roots, at 2.04-ish roots exist
  std::ifstream f(opt.out_dir / "match_scan.csv");
  std::string line;
  std::getline(f, line);  // header
  int rows = 0, with_roots = 0;
  double first_k0_with_root = 0;
  while (std::getline(f, line)) {
    ++rows;
    const auto c1 = line.find(','), c2 = line.find(',', line.find(',') + 1);
    const double k0 = std::stod(line.substr(0, c1));
    const int nroots = static_cast<int>(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
    if (nroots > 0 && with_roots++ == 0) first_k0_with_root = k0;
  }
  CHECK(rows == 21);
  CHECK(with_roots > 0);
  CHECK(first_k0_with_root > 0.4);  // emission switches on above a critical k0
}

TEST_CASE("oracle stage emits its sweep") {
  const fs::path base = fs::temp_directory_path() / "bellpair_test_oracle";
  fs::remove_all(base);
  PipelineOptions opt;
  opt.config_path = write_small_config(base).string();
  opt.out_dir = base / "out";
  opt.stages = {"oracle"};
  const auto m = run_pipeline(opt);
  CHECK(m.ok);
  CHECK(fs::exists(opt.out_dir / "oracle.csv"));
}
