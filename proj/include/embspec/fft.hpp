#pragma once

#include <memory>

#include <Eigen/Core>

namespace embspec {

/// Real-input DFT of a fixed length backed by FFTW.
///
/// forward() computes u(k) = sum_t v(t) exp(-2 pi i k t / n) for k = 0..n/2.
/// inverse() is the unnormalized c2r transform, so inverse(forward(v)) = n * v.
/// Plans are built with FFTW_ESTIMATE on aligned scratch buffers, which makes
/// the plan (and therefore the rounding) identical in every instance of the
/// same length. Instances are not shareable across threads; make one per worker.
class RealFft {
 public:
  explicit RealFft(Eigen::Index n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  Eigen::Index size() const { return n_; }
  Eigen::Index half_size() const { return n_ / 2 + 1; }

  void forward(const Eigen::Ref<const Eigen::VectorXd>& in, Eigen::Ref<Eigen::VectorXcd> out);
  void inverse(const Eigen::Ref<const Eigen::VectorXcd>& in, Eigen::Ref<Eigen::VectorXd> out);

 private:
  struct Plans;
  Eigen::Index n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace embspec
