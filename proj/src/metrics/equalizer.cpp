#include <cmath>

#include "unisynth/comm_metrics.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

std::vector<cplx> apply_equalizer(std::span<const cplx> symbols, std::span<const cplx> taps) {
  require(!taps.empty() && taps.size() % 2 == 1, "equalizer needs an odd number of taps");
  const auto center = static_cast<long>(taps.size() / 2);
  const auto len = static_cast<long>(symbols.size());
  std::vector<cplx> out(symbols.size());
  for (long n = 0; n < len; ++n) {
    cplx acc{};
    for (long k = 0; k < static_cast<long>(taps.size()); ++k) {
      const long idx = n + k - center;
      if (idx >= 0 && idx < len) acc += taps[static_cast<std::size_t>(k)] * symbols[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(n)] = acc;
  }
  return out;
}

std::vector<cplx> lms_equalizer_train(std::span<const cplx> rx_symbols,
                                      std::span<const cplx> reference, int n_taps, double step,
                                      int epochs) {
  require(n_taps >= 1 && n_taps <= 15 && n_taps % 2 == 1, "equalizer taps must be odd and at most 15");
  require(step > 0.0, "LMS step must be positive");
  require(epochs >= 1, "LMS needs at least one epoch");
  if (rx_symbols.size() != reference.size())
    throw PreconditionError("training and reference lengths differ");
  require(!reference.empty(), "LMS needs training symbols");

  double ref_power = 0.0;
  for (const auto& s : reference) ref_power += std::norm(s);
  ref_power /= static_cast<double>(reference.size());

  const auto center = static_cast<long>(n_taps / 2);
  const auto len = static_cast<long>(rx_symbols.size());
  std::vector<cplx> identity(static_cast<std::size_t>(n_taps));
  identity[static_cast<std::size_t>(center)] = 1.0;
  std::vector<cplx> w = identity;

  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (long n = 0; n < len; ++n) {
      cplx y{};
      for (long k = 0; k < n_taps; ++k) {
        const long idx = n + k - center;
        if (idx >= 0 && idx < len) y += w[static_cast<std::size_t>(k)] * rx_symbols[static_cast<std::size_t>(idx)];
      }
      const cplx e = reference[static_cast<std::size_t>(n)] - y;
      const double e2 = std::norm(e);
      if (!std::isfinite(e2) || e2 > 1e6 * ref_power) throw Error("LMS equalizer diverged (reduce the step size)");
      for (long k = 0; k < n_taps; ++k) {
        const long idx = n + k - center;
        if (idx >= 0 && idx < len)
          w[static_cast<std::size_t>(k)] += step * e * std::conj(rx_symbols[static_cast<std::size_t>(idx)]);
      }
    }
  }

  auto mse = [&](const std::vector<cplx>& taps) {
    const auto y = apply_equalizer(rx_symbols, taps);
    double acc = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) acc += std::norm(y[n] - reference[n]);
    return acc;
  };
  return mse(w) <= mse(identity) ? w : identity;
}

}  // namespace unisynth
