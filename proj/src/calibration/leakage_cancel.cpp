#include <cmath>
#include <limits>

#include "unisynth/calibration.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

namespace {

constexpr double kProbeOnThreshold = 1e-9;
constexpr double kStaticTolerance = 0.10;

// OFF samples that follow at least one ON sample.
std::vector<std::size_t> off_indices(const ComplexEnvelope& probe) {
  std::vector<std::size_t> idx;
  bool seen_on = false;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    if (std::abs(probe[k]) > kProbeOnThreshold) seen_on = true;
    else if (seen_on) idx.push_back(k);
  }
  return idx;
}

}  // namespace

ComplexEnvelope pulsed_carrier_probe(double sample_rate, std::span<const double> burst_amplitudes,
                                     std::size_t on_samples, std::size_t off_samples) {
  require(!burst_amplitudes.empty() && on_samples > 0 && off_samples > 0, "invalid leakage probe");
  std::vector<cplx> s;
  for (double a : burst_amplitudes) {
    require(a > 0.0, "burst amplitudes must be positive");
    s.insert(s.end(), on_samples, cplx(a, 0.0));
    s.insert(s.end(), off_samples, cplx{});
  }
  return ComplexEnvelope(std::move(s), sample_rate);
}

double onoff_ratio_db(const TxChain& chain, const ComplexEnvelope& probe) {
  const auto out = run_chain(chain, probe);
  double on = 0.0, off = 0.0;
  std::size_t n_on = 0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    if (std::abs(probe[k]) > kProbeOnThreshold) {
      on += std::norm(out[k]);
      ++n_on;
    }
  }
  const auto offs = off_indices(probe);
  require(n_on > 0 && !offs.empty(), "probe needs ON and OFF samples");
  for (auto k : offs) off += std::norm(out[k]);
  on /= static_cast<double>(n_on);
  off /= static_cast<double>(offs.size());
  if (off == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(on / off);
}

TxChain apply_leakage_cancel(const TxChain& chain, cplx cancel) {
  TxChain out = chain;
  bool found = false;
  for (auto& s : out.stages) {
    if (auto* p = std::get_if<stage::OnOffLeakage>(&s.spec)) {
      p->cancel = cancel;
      found = true;
    }
  }
  if (!found && cancel != cplx{}) throw CalibrationError("chain has no off-state leakage stage");
  return out;
}

cplx leakage_cancel(const TxChain& chain, const ComplexEnvelope& probe) {
  const TxChain raw = apply_leakage_cancel(chain, cplx{});
  const auto out = run_chain(raw, probe);
  const auto offs = off_indices(probe);
  require(!offs.empty(), "probe has no OFF window after an ON burst");
  cplx mean{};
  for (auto k : offs) mean += out[k];
  mean /= static_cast<double>(offs.size());
  double worst = 0.0;
  for (auto k : offs) worst = std::max(worst, std::abs(out[k] - mean));
  if (std::abs(mean) == 0.0) {
    if (worst == 0.0) return {};
    throw CalibrationError("off-state leakage is not static");
  }
  if (worst > kStaticTolerance * std::abs(mean)) throw CalibrationError("off-state leakage is not static");
  return -mean;
}

}  // namespace unisynth
