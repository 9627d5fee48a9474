#include <cmath>

#include "unisynth/calibration.hpp"
#include "unisynth/error.hpp"
#include "unisynth/parallel.hpp"

namespace unisynth {

TxChain apply_polar_alignment(const TxChain& chain, double phase_advance) {
  TxChain out = chain;
  bool found = false;
  for (auto& s : out.stages) {
    if (auto* p = std::get_if<stage::Polar>(&s.spec)) {
      p->phase_advance = phase_advance;
      found = true;
    }
  }
  if (!found) throw CalibrationError("chain has no polar stage to align");
  return out;
}

DelayAlignResult polar_delay_align(const TxChain& chain, double resolution, double search_range,
                                   const CommSetup& probe, int threads) {
  require(resolution > 0.0, "alignment resolution must be positive");
  require(search_range >= resolution, "search range must cover at least one step");
  const TxChain raw = apply_polar_alignment(chain, 0.0);
  const auto steps = static_cast<long>(std::floor(search_range / resolution + 1e-9));

  DelayAlignResult r;
  for (long k = -steps; k <= steps; ++k) r.grid.push_back(static_cast<double>(k) * resolution);
  r.evm.resize(r.grid.size());
  parallel_for(r.grid.size(), threads, [&](std::size_t i) {
    r.evm[i] = run_comm(apply_polar_alignment(raw, r.grid[i]), probe).evm.evm_rms;
  });

  // Ties go to the smaller correction.
  std::size_t best = static_cast<std::size_t>(steps);
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const bool better = r.evm[i] < r.evm[best] ||
                        (r.evm[i] == r.evm[best] && std::abs(r.grid[i]) < std::abs(r.grid[best]));
    if (better) best = i;
  }
  if (best == 0 || best + 1 == r.grid.size())
    throw CalibrationError("delay minimum lies on the search boundary; widen the search range");
  r.best_advance = r.grid[best];
  return r;
}

}  // namespace unisynth
