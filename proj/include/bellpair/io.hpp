#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bellpair/bell_metrics.hpp"

namespace bellpair {

// Little-endian binary containers with a common magic + kind header.
void save_field(const std::filesystem::path& path, const CondensateField& f);
CondensateField load_field(const std::filesystem::path& path);

void save_kernels(const std::filesystem::path& path, const BogoliubovKernels& k);
BogoliubovKernels load_kernels(const std::filesystem::path& path);

struct StateSnapshot {
  GaussianState state;
  Region region_a, region_b;
};
void save_state(const std::filesystem::path& path, const StateSnapshot& s);
StateSnapshot load_state(const std::filesystem::path& path);

// CSV with shortest-round-trip decimal formatting.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns) : cols_(std::move(columns)) {}
  void row(const std::vector<double>& values);
  void write(const std::filesystem::path& path) const;
  std::string body() const;

 private:
  std::vector<std::string> cols_;
  std::vector<std::vector<double>> rows_;
};

std::string format_double(double v);

// Minimal declarative plot descriptor accompanying each CSV.
struct PlotSeries {
  std::string x, y, label;
};
void write_plot_descriptor(const std::filesystem::path& path, const std::string& title,
                           const std::string& xlabel, const std::string& ylabel,
                           const std::string& csv_file, const std::vector<PlotSeries>& series);

std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

}  // namespace bellpair
