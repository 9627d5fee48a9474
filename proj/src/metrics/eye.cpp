#include <algorithm>
#include <cmath>
#include <limits>

#include "unisynth/comm_metrics.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Clustering {
  std::vector<EyeLevel> levels;
  std::vector<double> lo, hi;
  double worst_gap = kNegInf;
};

// 1-D k-means on sorted values; clusters are contiguous runs.
Clustering cluster(std::vector<double> v, std::size_t k) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  std::vector<double> centers(k);
  for (std::size_t i = 0; i < k; ++i) centers[i] = v[std::min(n - 1, (2 * i + 1) * n / (2 * k))];
  std::vector<std::size_t> bounds(k + 1);
  for (int iter = 0; iter < 100; ++iter) {
    bounds[0] = 0;
    bounds[k] = n;
    for (std::size_t i = 1; i < k; ++i) {
      const double mid = 0.5 * (centers[i - 1] + centers[i]);
      bounds[i] = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), mid) - v.begin());
      bounds[i] = std::max(bounds[i], bounds[i - 1]);
    }
    bool changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (bounds[i + 1] == bounds[i]) continue;
      double acc = 0.0;
      for (std::size_t j = bounds[i]; j < bounds[i + 1]; ++j) acc += v[j];
      const double c = acc / static_cast<double>(bounds[i + 1] - bounds[i]);
      if (c != centers[i]) changed = true;
      centers[i] = c;
    }
    if (!changed) break;
  }
  Clustering out;
  out.levels.resize(k);
  out.lo.resize(k);
  out.hi.resize(k);
  bool empty = false;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t a = bounds[i], b = bounds[i + 1];
    if (a == b) {
      empty = true;
      continue;
    }
    out.lo[i] = v[a];
    out.hi[i] = v[b - 1];
    out.levels[i] = {centers[i], v[b - 1] - v[a], b - a};
  }
  if (empty) return out;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < k; ++i) worst = std::min(worst, out.lo[i + 1] - out.hi[i]);
  out.worst_gap = worst;
  return out;
}

}  // namespace

EyeReport eye_metrics(std::span<const double> rail, std::size_t sps, std::size_t n_levels,
                      std::size_t first_sample, std::size_t n_symbols) {
  require(sps >= 2, "eye needs at least 2 samples per symbol");
  require(n_levels >= 2, "eye needs at least 2 levels");
  if (n_symbols < 32) throw PreconditionError("eye needs at least 32 symbols");
  require(first_sample + n_symbols * sps <= rail.size(), "eye window exceeds record");

  auto samples_at = [&](std::size_t p) {
    std::vector<double> v(n_symbols);
    for (std::size_t n = 0; n < n_symbols; ++n) v[n] = rail[first_sample + n * sps + p];
    return v;
  };

  // The decision phase is where label-free clusters separate best.
  std::vector<Clustering> per_phase(sps);
  for (std::size_t p = 0; p < sps; ++p) per_phase[p] = cluster(samples_at(p), n_levels);
  std::size_t best = 0;
  for (std::size_t p = 1; p < sps; ++p)
    if (per_phase[p].worst_gap > per_phase[best].worst_gap) best = p;

  // Each symbol period keeps the level it has at the decision phase, so
  // traces still in transition count against their own level elsewhere.
  std::vector<double> thresholds;
  for (std::size_t i = 0; i + 1 < n_levels; ++i)
    thresholds.push_back(0.5 * (per_phase[best].levels[i].mean + per_phase[best].levels[i + 1].mean));
  const auto at_best = samples_at(best);
  std::vector<std::size_t> label(n_symbols);
  for (std::size_t n = 0; n < n_symbols; ++n)
    label[n] = static_cast<std::size_t>(std::upper_bound(thresholds.begin(), thresholds.end(), at_best[n]) -
                                        thresholds.begin());

  auto labeled_gap = [&](std::size_t p) {
    std::vector<double> lo(n_levels, std::numeric_limits<double>::infinity()), hi(n_levels, kNegInf);
    for (std::size_t n = 0; n < n_symbols; ++n) {
      const double v = rail[first_sample + n * sps + p];
      lo[label[n]] = std::min(lo[label[n]], v);
      hi[label[n]] = std::max(hi[label[n]], v);
    }
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < n_levels; ++i) worst = std::min(worst, lo[i + 1] - hi[i]);
    return std::isfinite(worst) ? worst : kNegInf;
  };
  std::vector<double> gap(sps);
  for (std::size_t p = 0; p < sps; ++p) gap[p] = labeled_gap(p);

  // Widest circular run of open phases.
  std::size_t widest = 0;
  if (std::all_of(gap.begin(), gap.end(), [](double g) { return g > 0.0; })) {
    widest = sps;
  } else {
    std::size_t run = 0;
    for (std::size_t i = 0; i < 2 * sps; ++i) {
      run = gap[i % sps] > 0.0 ? run + 1 : 0;
      widest = std::max(widest, std::min(run, sps));
    }
  }

  EyeReport r;
  r.eye_height = std::max(0.0, per_phase[best].worst_gap);
  r.eye_width = static_cast<double>(widest) / static_cast<double>(sps);
  r.best_phase = static_cast<double>(best) / static_cast<double>(sps);
  r.levels = per_phase[best].levels;
  double smin = std::numeric_limits<double>::infinity(), smax = 0.0, ssum = 0.0;
  for (std::size_t i = 0; i + 1 < r.levels.size(); ++i) {
    const double s = r.levels[i + 1].mean - r.levels[i].mean;
    smin = std::min(smin, s);
    smax = std::max(smax, s);
    ssum += s;
  }
  const double smean = ssum / static_cast<double>(r.levels.size() - 1);
  r.spacing_nonuniformity = smean > 0.0 ? (smax - smin) / smean : 0.0;
  for (const auto& l : r.levels) r.max_level_spread = std::max(r.max_level_spread, l.spread);
  return r;
}

EyeReport eye_metrics(const ComplexEnvelope& rx, double symbol_period, std::size_t n_levels,
                      const PulseShape& shape) {
  const double sps_d = symbol_period * rx.sample_rate();
  require(std::abs(sps_d - shape.samples_per_symbol) < 1e-6 * sps_d,
          "symbol period does not match the shape's samples per symbol");
  const auto sps = static_cast<std::size_t>(shape.samples_per_symbol);
  const std::size_t n_sym = symbols_in_record(rx.size(), shape);
  const std::size_t guard = shape.guard_symbols();
  if (n_sym < 2 * guard + 33) throw PreconditionError("eye needs at least 32 symbols after guard trim");
  const std::size_t first = guard * sps + shape.delay_samples() - sps / 2;
  const auto rail = rx.real_part();
  return eye_metrics(rail, sps, n_levels, first, n_sym - 2 * guard - 1);
}

}  // namespace unisynth
