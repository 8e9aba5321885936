#pragma once

#include <Eigen/Dense>
#include <complex>
#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace bellpair {

// Shared worker pool; block assignment is static so results never depend on
// the thread count.
class ThreadPool {
 public:
  static ThreadPool& instance();
  int size() const { return static_cast<int>(workers_.size()) + 1; }

  // Splits [0, total) into one contiguous block per worker and runs
  // fn(begin, end) on each; the calling thread takes the first block.
  void run_blocks(int total, const std::function<void(int, int)>& fn);

  ~ThreadPool();

 private:
  explicit ThreadPool(int n_workers);
  void worker_loop(int id);

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(int, int)>* job_ = nullptr;
  std::vector<std::pair<int, int>> ranges_;
  std::vector<bool> pending_;
  int n_done_ = 0;
  bool stop_ = false;
};

// Unnormalized complex DFTs (FFTW behind the scenes).  forward applies
// exp(-i k x), backward exp(+i k x); callers divide by n where needed.
class Fft {
 public:
  explicit Fft(int n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int n() const { return n_; }

  void forward(std::complex<double>* data);   // single length-n vector, in place
  void backward(std::complex<double>* data);

  // Transform along the first index of a column-major (n, m) matrix, all
  // columns, split over the pool.
  void forward_cols(Eigen::MatrixXcd& a);
  void backward_cols(Eigen::MatrixXcd& a);

  // Transform along the second index of a column-major (m, n) matrix.
  void forward_rows(Eigen::MatrixXcd& a);
  void backward_rows(Eigen::MatrixXcd& a);

 private:
  void* plan_cols(int howmany, int sign);
  void* plan_rows(int nrows, int sign);
  void exec_cols(Eigen::MatrixXcd& a, int sign);

  int n_;
  void* fwd1_ = nullptr;
  void* bwd1_ = nullptr;
  std::mutex plan_mu_;
  std::map<std::pair<int, int>, void*> col_plans_;  // (howmany, sign) -> plan
  std::map<std::pair<int, int>, void*> row_plans_;  // (nrows, sign) -> plan
};

// FFT mode ordering helpers: mode m of an n-point grid of length L carries
// momentum 2 pi / L * (m <= n/2 ? m : m - n).
inline double fft_momentum(int m, int n, double box) {
  const int mm = (m < (n + 1) / 2) ? m : m - n;
  return 2.0 * M_PI * mm / box;
}

}  // namespace bellpair
