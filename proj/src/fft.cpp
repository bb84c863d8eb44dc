#include "embspec/fft.hpp"

#include <complex>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

#include "embspec/error.hpp"

namespace embspec {

namespace {

// The FFTW planner is not reentrant; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct RealFft::Plans {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    fftw_free(real);
    fftw_free(spec);
  }
};

RealFft::RealFft(Eigen::Index n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 1) throw ValidationError("FFT length must be positive");
  const int len = static_cast<int>(n);
  plans_->real = fftw_alloc_real(static_cast<std::size_t>(n));
  plans_->spec = fftw_alloc_complex(static_cast<std::size_t>(half_size()));
  if (!plans_->real || !plans_->spec) throw std::bad_alloc();

  std::lock_guard lock(planner_mutex());
  plans_->r2c = fftw_plan_dft_r2c_1d(len, plans_->real, plans_->spec, FFTW_ESTIMATE);
  plans_->c2r = fftw_plan_dft_c2r_1d(len, plans_->spec, plans_->real, FFTW_ESTIMATE);
  if (!plans_->r2c || !plans_->c2r) throw std::runtime_error("FFTW planning failed");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(const Eigen::Ref<const Eigen::VectorXd>& in, Eigen::Ref<Eigen::VectorXcd> out) {
  Eigen::Map<Eigen::VectorXd>(plans_->real, n_) = in;
  fftw_execute(plans_->r2c);
  out = Eigen::Map<const Eigen::VectorXcd>(reinterpret_cast<const std::complex<double>*>(plans_->spec), half_size());
}

void RealFft::inverse(const Eigen::Ref<const Eigen::VectorXcd>& in, Eigen::Ref<Eigen::VectorXd> out) {
  // c2r overwrites its input, so always go through the owned buffer.
  Eigen::Map<Eigen::VectorXcd>(reinterpret_cast<std::complex<double>*>(plans_->spec), half_size()) = in;
  fftw_execute(plans_->c2r);
  out = Eigen::Map<const Eigen::VectorXd>(plans_->real, n_);
}

}  // namespace embspec
