#include <algorithm>
#include <cmath>
#include <limits>

#include "unisynth/comm_metrics.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

namespace {

class Sampler {
 public:
  Sampler(const ComplexEnvelope& rx, const PulseShape& shape) : rx_(rx) {
    if (shape.kind == PulseKind::root_raised_cosine) {
      taps_ = shape_filter(shape);
      double energy = 0.0;
      for (double h : taps_) energy += h * h;
      for (double& h : taps_) h /= energy;
    }
  }

  // Matched-filter output (or the raw sample) at index k.
  cplx at(long k) const {
    const auto len = static_cast<long>(rx_.size());
    if (taps_.empty()) return (k >= 0 && k < len) ? rx_[static_cast<std::size_t>(k)] : cplx{};
    const auto center = static_cast<long>(taps_.size() / 2);
    cplx acc{};
    for (long m = 0; m < static_cast<long>(taps_.size()); ++m) {
      const long idx = k + m - center;
      if (idx < 0 || idx >= len) continue;
      acc += taps_[static_cast<std::size_t>(m)] * rx_[static_cast<std::size_t>(idx)];
    }
    return acc;
  }

 private:
  const ComplexEnvelope& rx_;
  std::vector<double> taps_;
};

// Distance to the second-nearest point minus distance to the nearest.
double decision_margin(const Constellation& c, cplx r) {
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = d1;
  for (const auto& p : c.points) {
    const double d = std::abs(p - r);
    if (d < d1) {
      d2 = d1;
      d1 = d;
    } else if (d < d2) {
      d2 = d;
    }
  }
  return d2 - d1;
}

}  // namespace

std::size_t symbols_in_record(std::size_t samples, const PulseShape& shape) {
  const std::size_t taps = shape.tap_count();
  if (samples < taps) return 0;
  return (samples - taps) / static_cast<std::size_t>(shape.samples_per_symbol) + 1;
}

DemodResult demodulate(const ComplexEnvelope& rx, const Constellation& c, const PulseShape& shape,
                       const DemodOptions& options) {
  shape.validate();
  const std::size_t n_sym = symbols_in_record(rx.size(), shape);
  const std::size_t guard = shape.guard_symbols();
  if (n_sym <= 2 * guard) throw PreconditionError("record too short: no symbols left after guard trim");
  const bool aided = !options.reference.empty();
  if (aided) require(options.reference.size() >= n_sym, "reference stream shorter than record");

  const Sampler sampler(rx, shape);
  const long sps = shape.samples_per_symbol;
  const auto nominal = static_cast<long>(shape.delay_samples());
  const std::size_t train_end = std::min(n_sym - guard, guard + std::max<std::size_t>(1, options.training_symbols));

  auto index_of = [&](std::size_t n, long tau) { return static_cast<long>(n) * sps + nominal + tau; };

  // Candidate order 0, -1, 1, -2, 2, ... so ties resolve toward the nominal instant.
  long best_tau = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (long step = 0; step <= sps; ++step) {
    const long tau = (step % 2 == 0) ? -(step / 2) : (step + 1) / 2;
    if (tau >= sps / 2 || tau < -sps / 2) continue;
    double score;
    if (aided) {
      double mse = 0.0;
      for (std::size_t n = guard; n < train_end; ++n) mse += std::norm(sampler.at(index_of(n, tau)) - options.reference[n]);
      score = -mse;
    } else {
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t n = guard; n < train_end; ++n)
        worst = std::min(worst, decision_margin(c, sampler.at(index_of(n, tau))));
      score = worst;
    }
    if (score > best_score) {
      best_score = score;
      best_tau = tau;
    }
  }

  DemodResult r;
  r.timing_offset = best_tau;
  r.first_symbol = guard;
  r.all_symbols.resize(n_sym);
  for (std::size_t n = 0; n < n_sym; ++n) r.all_symbols[n] = sampler.at(index_of(n, best_tau));
  const std::vector<cplx> eq = options.equalizer.empty()
                                   ? r.all_symbols
                                   : apply_equalizer(r.all_symbols, options.equalizer);
  r.soft.assign(eq.begin() + static_cast<long>(guard), eq.end() - static_cast<long>(guard));
  r.decisions.reserve(r.soft.size());
  for (const auto& s : r.soft) {
    const std::size_t idx = c.nearest(s);
    r.decisions.push_back(idx);
    if (c.bits_per_symbol > 0) {
      const auto b = label_bits(c.labels[idx], c.bits_per_symbol);
      r.bits.insert(r.bits.end(), b.begin(), b.end());
    }
  }
  return r;
}

}  // namespace unisynth
