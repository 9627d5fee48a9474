#include <algorithm>
#include <cmath>

#include "unisynth/calibration.hpp"
#include "unisynth/error.hpp"
#include "unisynth/protocols.hpp"

namespace unisynth {

namespace {

double interpolate(std::span<const double> x, std::span<const double> y, double v) {
  std::size_t hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), v) - x.begin());
  hi = std::clamp<std::size_t>(hi, 1, x.size() - 1);
  const std::size_t lo = hi - 1;
  if (x[hi] == x[lo]) return y[lo];
  return y[lo] + (v - x[lo]) / (x[hi] - x[lo]) * (y[hi] - y[lo]);
}

}  // namespace

std::vector<double> isotonic_fit(std::span<const double> values) {
  struct Block {
    double sum;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (double v : values) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1) {
      const Block& b = blocks.back();
      const Block& a = blocks[blocks.size() - 2];
      if (a.sum / static_cast<double>(a.count) <= b.sum / static_cast<double>(b.count)) break;
      const Block merged{a.sum + b.sum, a.count + b.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.sum / static_cast<double>(b.count));
  return out;
}

double AmplitudeLut::effective_for(double code) const { return interpolate(codes, effective, code); }

stage::AmplitudeTable AmplitudeLut::as_table() const {
  stage::AmplitudeTable t;
  t.input.push_back(0.0);
  t.output.push_back(0.0);
  std::size_t k = 0;
  while (k < codes.size()) {
    std::size_t j = k;
    double code_sum = 0.0;
    while (j < codes.size() && effective[j] == effective[k]) code_sum += codes[j++];
    const double e = effective[k];
    if (e > t.input.back()) {
      t.input.push_back(e);
      t.output.push_back(code_sum / static_cast<double>(j - k));
    }
    k = j;
  }
  require(t.input.size() >= 2, "Rabi LUT has no nonzero amplitude");
  return t;
}

double AmplitudeLut::code_for(double effective_amplitude) const {
  const auto t = as_table();
  return interpolate(t.input, t.output, effective_amplitude);
}

AmplitudeLut rabi_amplitude_cal(const QubitModel& model, const TxChain& chain,
                                std::span<const double> code_grid, const RabiCalOptions& options) {
  require(code_grid.size() >= 3, "Rabi calibration needs at least 3 codes");
  for (std::size_t k = 0; k < code_grid.size(); ++k) {
    require(code_grid[k] >= 0.0, "codes must be nonnegative");
    if (k > 0) require(code_grid[k] > code_grid[k - 1], "codes must be strictly increasing");
  }
  const TxChain raw = remove_labeled(chain, kRabiLabel);
  const auto p1 = rabi_protocol(model, raw, options.probe, code_grid, options.sample_rate, options.threads);

  // First branch up to the population maximum. One code past it is kept so
  // that pi is bracketed; the peak itself takes whichever branch is
  // continuous with its neighbours.
  const auto peak = static_cast<std::size_t>(std::max_element(p1.begin(), p1.end()) - p1.begin());
  if (p1[peak] < 0.99) throw CalibrationError("code grid does not reach a pi rotation");
  const std::size_t last = std::min(peak + 1, p1.size() - 1);
  const auto first_branch = [&](std::size_t k) {
    return 2.0 * std::asin(std::sqrt(std::clamp(p1[k], 0.0, 1.0)));
  };

  AmplitudeLut lut;
  lut.codes.assign(code_grid.begin(), code_grid.begin() + static_cast<long>(last) + 1);
  for (std::size_t k = 0; k <= last; ++k) lut.theta.push_back(k <= peak ? first_branch(k) : kTwoPi - first_branch(k));
  if (peak > 0 && last > peak) {
    const double mid = 0.5 * (lut.theta[peak - 1] + lut.theta[peak + 1]);
    const double alt = kTwoPi - lut.theta[peak];
    if (std::abs(alt - mid) < std::abs(lut.theta[peak] - mid)) lut.theta[peak] = alt;
  }
  const double per_amplitude = model.drive_gain * unit_pulse_area(options.probe);
  for (double theta : lut.theta) lut.measured.push_back(theta / per_amplitude);
  lut.effective = isotonic_fit(lut.measured);
  for (std::size_t k = 0; k < lut.codes.size(); ++k)
    lut.fit_residual_rad = std::max(lut.fit_residual_rad, std::abs(lut.effective[k] - lut.measured[k]) * per_amplitude);
  if (lut.fit_residual_rad > options.max_residual_rad)
    throw CalibrationError("code map non-monotonicity is too large to resolve");
  return lut;
}

TxChain apply_rabi_lut(const TxChain& chain, const AmplitudeLut& lut) {
  Stage s = make_stage(lut.as_table(), kRabiLabel);
  s.fixed = true;
  return insert_correction(chain, std::move(s));
}

}  // namespace unisynth
