#include "bellpair/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

namespace bellpair {

namespace {

constexpr char kMagic[8] = {'B', 'P', 'S', 'N', 'A', 'P', '0', '1'};
enum Kind : uint32_t { kField = 1, kKernels = 2, kState = 3 };

struct Writer {
  std::ofstream out;
  explicit Writer(const std::filesystem::path& p) : out(p, std::ios::binary) {
    if (!out) throw std::runtime_error("io: cannot open for writing: " + p.string());
  }
  void bytes(const void* p, size_t n) { out.write(static_cast<const char*>(p), n); }
  void u32(uint32_t v) { bytes(&v, 4); }
  void i64(int64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void cvec(const Eigen::VectorXcd& v) { bytes(v.data(), sizeof(cxd) * v.size()); }
  void cmat(const Eigen::MatrixXcd& m) { bytes(m.data(), sizeof(cxd) * m.size()); }
  void dvec(const std::vector<double>& v) { bytes(v.data(), sizeof(double) * v.size()); }
  void str(const std::string& s) {
    i64(static_cast<int64_t>(s.size()));
    bytes(s.data(), s.size());
  }
};

struct Reader {
  std::ifstream in;
  explicit Reader(const std::filesystem::path& p) : in(p, std::ios::binary) {
    if (!in) throw std::runtime_error("io: cannot open for reading: " + p.string());
  }
  void bytes(void* p, size_t n) {
    in.read(static_cast<char*>(p), n);
    if (!in) throw std::runtime_error("io: truncated snapshot file");
  }
  uint32_t u32() {
    uint32_t v;
    bytes(&v, 4);
    return v;
  }
  int64_t i64() {
    int64_t v;
    bytes(&v, 8);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
  void cvec(Eigen::VectorXcd& v, int64_t n) {
    v.resize(n);
    bytes(v.data(), sizeof(cxd) * n);
  }
  void cmat(Eigen::MatrixXcd& m, int64_t r, int64_t c) {
    m.resize(r, c);
    bytes(m.data(), sizeof(cxd) * r * c);
  }
  void dvec(std::vector<double>& v, int64_t n) {
    v.resize(n);
    bytes(v.data(), sizeof(double) * n);
  }
  std::string str() {
    std::string s(static_cast<size_t>(i64()), '\0');
    bytes(s.data(), s.size());
    return s;
  }
};

uint32_t open_kind(Reader& r) {
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("io: bad snapshot magic");
  return r.u32();
}

void write_header(Writer& w, Kind kind) {
  w.bytes(kMagic, 8);
  w.u32(kind);
}

}  // namespace

void save_field(const std::filesystem::path& path, const CondensateField& f) {
  Writer w(path);
  write_header(w, kField);
  w.i64(f.grid.n);
  w.f64(f.grid.box);
  w.f64(f.t);
  w.cvec(f.phi);
}

CondensateField load_field(const std::filesystem::path& path) {
  Reader r(path);
  if (open_kind(r) != kField) throw std::runtime_error("io: not a field snapshot");
  CondensateField f;
  f.grid.n = static_cast<int>(r.i64());
  f.grid.box = r.f64();
  f.t = r.f64();
  r.cvec(f.phi, f.grid.n);
  return f;
}

void save_kernels(const std::filesystem::path& path, const BogoliubovKernels& k) {
  Writer w(path);
  write_header(w, kKernels);
  w.i64(k.grid.n);
  w.f64(k.grid.box);
  w.f64(k.t);
  w.u32(k.symmetric ? 1 : 0);
  w.cmat(k.c_plus);
  w.cmat(k.s_plus);
  if (!k.symmetric) {
    w.cmat(k.c_minus);
    w.cmat(k.s_minus);
  }
}

BogoliubovKernels load_kernels(const std::filesystem::path& path) {
  Reader r(path);
  if (open_kind(r) != kKernels) throw std::runtime_error("io: not a kernel snapshot");
  BogoliubovKernels k;
  k.grid.n = static_cast<int>(r.i64());
  k.grid.box = r.f64();
  k.t = r.f64();
  k.symmetric = r.u32() != 0;
  r.cmat(k.c_plus, k.grid.n, k.grid.n);
  r.cmat(k.s_plus, k.grid.n, k.grid.n);
  if (!k.symmetric) {
    r.cmat(k.c_minus, k.grid.n, k.grid.n);
    r.cmat(k.s_minus, k.grid.n, k.grid.n);
  }
  return k;
}

void save_state(const std::filesystem::path& path, const StateSnapshot& s) {
  Writer w(path);
  write_header(w, kState);
  const auto& st = s.state;
  w.f64(st.t);
  w.f64(st.box);
  w.u32(st.symmetric ? 1 : 0);
  w.i64(static_cast<int64_t>(st.k.size()));
  w.i64(static_cast<int64_t>(st.k_full.size()));
  w.dvec(st.k);
  w.dvec(st.k_full);
  w.bytes(st.diag_plus.data(), sizeof(double) * st.diag_plus.size());
  w.cmat(st.g_plus);
  w.cmat(st.m_plus);
  if (!st.symmetric) {
    w.cmat(st.g_minus);
    w.cmat(st.m_minus);
  }
  w.str(s.region_a.label);
  w.f64(s.region_a.k_lo);
  w.f64(s.region_a.k_hi);
  w.str(s.region_b.label);
  w.f64(s.region_b.k_lo);
  w.f64(s.region_b.k_hi);
}

StateSnapshot load_state(const std::filesystem::path& path) {
  Reader r(path);
  if (open_kind(r) != kState) throw std::runtime_error("io: not a state snapshot");
  StateSnapshot s;
  auto& st = s.state;
  st.t = r.f64();
  st.box = r.f64();
  st.symmetric = r.u32() != 0;
  const int64_t m = r.i64();
  const int64_t nf = r.i64();
  r.dvec(st.k, m);
  r.dvec(st.k_full, nf);
  st.diag_plus.resize(nf);
  r.bytes(st.diag_plus.data(), sizeof(double) * nf);
  r.cmat(st.g_plus, m, m);
  r.cmat(st.m_plus, m, m);
  if (!st.symmetric) {
    r.cmat(st.g_minus, m, m);
    r.cmat(st.m_minus, m, m);
  }
  s.region_a.label = r.str();
  s.region_a.k_lo = r.f64();
  s.region_a.k_hi = r.f64();
  s.region_b.label = r.str();
  s.region_b.k_lo = r.f64();
  s.region_b.k_hi = r.f64();
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != cols_.size())
    throw std::invalid_argument("CsvWriter: row width mismatch");
  rows_.push_back(values);
}

std::string CsvWriter::body() const {
  std::string out;
  for (size_t i = 0; i < cols_.size(); ++i) {
    out += cols_[i];
    out += (i + 1 < cols_.size()) ? ',' : '\n';
  }
  for (const auto& r : rows_) {
    for (size_t i = 0; i < r.size(); ++i) {
      out += format_double(r[i]);
      out += (i + 1 < r.size()) ? ',' : '\n';
    }
  }
  return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("io: cannot open for writing: " + path.string());
  out << body();
}

void write_plot_descriptor(const std::filesystem::path& path, const std::string& title,
                           const std::string& xlabel, const std::string& ylabel,
                           const std::string& csv_file, const std::vector<PlotSeries>& series) {
  nlohmann::json j;
  j["title"] = title;
  j["xlabel"] = xlabel;
  j["ylabel"] = ylabel;
  j["csv"] = csv_file;
  j["series"] = nlohmann::json::array();
  for (const auto& s : series)
    j["series"].push_back({{"x", s.x}, {"y", s.y}, {"label", s.label}});
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
}

std::string sha256_bytes(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot open for digest: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_bytes(bytes);
}

}  // namespace bellpair
