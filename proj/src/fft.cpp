#include "bellpair/fft.hpp"

#include <fftw3.h>

#include <cstdlib>

namespace bellpair {

// ---- ThreadPool ----

ThreadPool& ThreadPool::instance() {
  static ThreadPool pool([] {
    if (const char* env = std::getenv("BELLPAIR_THREADS")) {
      int n = std::atoi(env);
      if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(hc == 0 ? 1u : hc, 8u));
  }());
  return pool;
}

ThreadPool::ThreadPool(int n_threads) {
  const int n_workers = std::max(0, n_threads - 1);
  ranges_.resize(n_workers);
  pending_.assign(n_workers, false);
  for (int i = 0; i < n_workers; ++i)
    workers_.emplace_back([this, i] { worker_loop(i); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& w : workers_) w.join();
}

void ThreadPool::worker_loop(int id) {
  for (;;) {
    const std::function<void(int, int)>* job = nullptr;
    std::pair<int, int> range;
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [&] { return stop_ || pending_[id]; });
      if (stop_) return;
      job = job_;
      range = ranges_[id];
      pending_[id] = false;
    }
    if (range.second > range.first) (*job)(range.first, range.second);
    {
      std::lock_guard lk(mu_);
      ++n_done_;
    }
    done_cv_.notify_one();
  }
}

void ThreadPool::run_blocks(int total, const std::function<void(int, int)>& fn) {
  const int nb = size();
  if (nb == 1 || total < 2 * nb) {
    if (total > 0) fn(0, total);
    return;
  }
  const int chunk = (total + nb - 1) / nb;
  std::pair<int, int> own{0, std::min(chunk, total)};
  {
    std::lock_guard lk(mu_);
    job_ = &fn;
    n_done_ = 0;
    for (size_t i = 0; i < workers_.size(); ++i) {
      int b = std::min<int>(total, static_cast<int>(i + 1) * chunk);
      int e = std::min<int>(total, static_cast<int>(i + 2) * chunk);
      ranges_[i] = {b, e};
      pending_[i] = true;
    }
  }
  cv_.notify_all();
  fn(own.first, own.second);
  std::unique_lock lk(mu_);
  done_cv_.wait(lk, [&] { return n_done_ == static_cast<int>(workers_.size()); });
  job_ = nullptr;
}

// ---- Fft ----

namespace {
// Plans are created once against a scratch buffer with FFTW_UNALIGNED so they
// can be replayed on any array of the same layout (execute_dft is
// thread-safe; plan creation is not and is serialized by plan_mu_).
fftw_plan make_plan_many(int n, int howmany, int stride, int dist, int sign) {
  const size_t need = static_cast<size_t>(howmany - 1) * dist + static_cast<size_t>(n - 1) * stride + 1;
  std::vector<std::complex<double>> scratch(need);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  return fftw_plan_many_dft(1, &n, howmany, p, nullptr, stride, dist, p, nullptr, stride, dist,
                            sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
}
}  // namespace

Fft::Fft(int n) : n_(n) {
  fwd1_ = make_plan_many(n_, 1, 1, n_, FFTW_FORWARD);
  bwd1_ = make_plan_many(n_, 1, 1, n_, FFTW_BACKWARD);
}

Fft::~Fft() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd1_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd1_));
  for (auto& [key, p] : col_plans_) fftw_destroy_plan(static_cast<fftw_plan>(p));
  for (auto& [key, p] : row_plans_) fftw_destroy_plan(static_cast<fftw_plan>(p));
}

void Fft::forward(std::complex<double>* data) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(fwd1_), p, p);
}

void Fft::backward(std::complex<double>* data) {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(bwd1_), p, p);
}

void* Fft::plan_cols(int howmany, int sign) {
  std::lock_guard lk(plan_mu_);
  auto key = std::make_pair(howmany, sign);
  auto it = col_plans_.find(key);
  if (it != col_plans_.end()) return it->second;
  void* p = make_plan_many(n_, howmany, 1, n_, sign);
  col_plans_[key] = p;
  return p;
}

void* Fft::plan_rows(int nrows, int sign) {
  std::lock_guard lk(plan_mu_);
  auto key = std::make_pair(nrows, sign);
  auto it = row_plans_.find(key);
  if (it != row_plans_.end()) return it->second;
  // length-n transform along the second index: stride = nrows, dist = 1
  void* p = make_plan_many(n_, nrows, nrows, 1, sign);
  row_plans_[key] = p;
  return p;
}

void Fft::exec_cols(Eigen::MatrixXcd& a, int sign) {
  const int m = static_cast<int>(a.cols());
  ThreadPool::instance().run_blocks(m, [&](int b, int e) {
    if (e <= b) return;
    auto* plan = static_cast<fftw_plan>(plan_cols(e - b, sign));
    auto* ptr = reinterpret_cast<fftw_complex*>(a.data() + static_cast<ptrdiff_t>(b) * n_);
    fftw_execute_dft(plan, ptr, ptr);
  });
}

void Fft::forward_cols(Eigen::MatrixXcd& a) { exec_cols(a, FFTW_FORWARD); }
void Fft::backward_cols(Eigen::MatrixXcd& a) { exec_cols(a, FFTW_BACKWARD); }

void Fft::forward_rows(Eigen::MatrixXcd& a) {
  auto* plan = static_cast<fftw_plan>(plan_rows(static_cast<int>(a.rows()), FFTW_FORWARD));
  auto* ptr = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(plan, ptr, ptr);
}

void Fft::backward_rows(Eigen::MatrixXcd& a) {
  auto* plan = static_cast<fftw_plan>(plan_rows(static_cast<int>(a.rows()), FFTW_BACKWARD));
  auto* ptr = reinterpret_cast<fftw_complex*>(a.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace bellpair
