#include "kst/heat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "kst/error.hpp"

namespace kst {

using detail::FftwBuffer;
using detail::FftwPlan;

struct HeatPropagator::Plans {
  FftwPlan forward;  // DCT-II
  FftwPlan inverse;  // DCT-III
};

HeatPropagator::HeatPropagator(const Grid3& grid) : grid_(grid), plans_(std::make_unique<Plans>()) {
  const int n = grid.n();
  const double h = grid.h();
  symbol_1d_.resize(n);
  for (int k = 0; k < n; ++k) {
    const double s = std::sin(std::numbers::pi * k / (2.0 * n));
    symbol_1d_[k] = 4.0 / (h * h) * s * s;
  }
  FftwBuffer<double> buf(grid.size());
  std::lock_guard lock(detail::fftw_planner_mutex());
  plans_->forward = FftwPlan(fftw_plan_r2r_3d(n, n, n, buf.data(), buf.data(), FFTW_REDFT10, FFTW_REDFT10,
                                              FFTW_REDFT10, FFTW_ESTIMATE));
  plans_->inverse = FftwPlan(fftw_plan_r2r_3d(n, n, n, buf.data(), buf.data(), FFTW_REDFT01, FFTW_REDFT01,
                                              FFTW_REDFT01, FFTW_ESTIMATE));
}

HeatPropagator::~HeatPropagator() = default;

void HeatPropagator::apply(std::vector<double>& values, double dt) const {
  if (!(dt >= 0.0)) throw Error(ErrorCode::BadParameter, "heat step needs dt >= 0");
  if (values.size() != grid_.size()) throw Error(ErrorCode::InvalidGrid, "field size does not match grid");
  if (dt == 0.0) return;
  const int n = grid_.n();
  FftwBuffer<double> buf(grid_.size());
  std::copy(values.begin(), values.end(), buf.data());
  fftw_execute_r2r(plans_->forward.get(), buf.data(), buf.data());

  std::vector<double> decay(n);
  for (int k = 0; k < n; ++k) decay[k] = std::exp(-dt * symbol_1d_[k]);
  const double norm = 1.0 / (8.0 * static_cast<double>(n) * n * n);
#pragma omp parallel for
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double ab = decay[a] * decay[b] * norm;
      double* row = buf.data() + grid_.index(a, b, 0);
      for (int c = 0; c < n; ++c) row[c] *= ab * decay[c];
    }
  }
  fftw_execute_r2r(plans_->inverse.get(), buf.data(), buf.data());
  std::copy(buf.data(), buf.data() + grid_.size(), values.begin());
}

}  // namespace kst
