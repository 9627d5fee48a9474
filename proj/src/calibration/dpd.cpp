#include <cmath>

#include <Eigen/Dense>

#include "unisynth/calibration.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

DpdCharacterization characterize_am(const TxChain& chain, std::span<const double> amplitude_grid,
                                    double sample_rate, std::size_t hold) {
  require(hold >= 1, "staircase hold must be at least one sample");
  require(!amplitude_grid.empty(), "amplitude grid must not be empty");
  std::vector<cplx> stair;
  stair.reserve(amplitude_grid.size() * hold);
  for (double a : amplitude_grid) {
    require(a > 0.0, "probe amplitudes must be positive");
    stair.insert(stair.end(), hold, cplx(a, 0.0));
  }
  const auto out = run_chain(chain, ComplexEnvelope(std::move(stair), sample_rate));
  DpdCharacterization c;
  for (std::size_t i = 0; i < amplitude_grid.size(); ++i) {
    const cplx y = out[(i + 1) * hold - 1];  // settled end of each step
    c.input.push_back(amplitude_grid[i]);
    c.gain.push_back(std::abs(y));
    c.phase.push_back(std::arg(y));
  }
  return c;
}

DpdPolynomial dpd_fit(const TxChain& chain, std::span<const double> amplitude_grid, int order,
                      double sample_rate) {
  require(order >= 1 && order <= 7 && order % 2 == 1, "DPD order must be odd and at most 7");
  const int gain_terms = (order + 1) / 2;
  const int phase_terms = order + 1;
  require(amplitude_grid.size() >= static_cast<std::size_t>(phase_terms),
          "amplitude grid too small for the requested order");
  for (std::size_t k = 1; k < amplitude_grid.size(); ++k)
    require(amplitude_grid[k] > amplitude_grid[k - 1], "amplitude grid must be increasing");

  const TxChain raw = remove_labeled(chain, kDpdLabel);
  const auto ch = characterize_am(raw, amplitude_grid, sample_rate);
  for (std::size_t k = 1; k < ch.gain.size(); ++k)
    if (!(ch.gain[k] > ch.gain[k - 1])) throw CalibrationError("AM-AM response is not monotone on the grid");

  DpdPolynomial dpd;
  dpd.small_signal_gain = ch.gain.front() / ch.input.front();
  dpd.small_signal_phase = ch.phase.front();
  const auto n = static_cast<Eigen::Index>(ch.input.size());

  // Input amplitude as an odd polynomial of the normalized output amplitude.
  Eigen::MatrixXd ag(n, gain_terms);
  Eigen::VectorXd bg(n);
  Eigen::MatrixXd ap(n, phase_terms);
  Eigen::VectorXd bp(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = ch.gain[static_cast<std::size_t>(i)] / dpd.small_signal_gain;
    for (int j = 0; j < gain_terms; ++j) ag(i, j) = std::pow(r, 2 * j + 1);
    bg(i) = ch.input[static_cast<std::size_t>(i)];
    for (int j = 0; j < phase_terms; ++j) ap(i, j) = std::pow(r, j);
    bp(i) = wrap_phase(ch.phase[static_cast<std::size_t>(i)] - dpd.small_signal_phase);
  }
  const Eigen::VectorXd pg = ag.colPivHouseholderQr().solve(bg);
  const Eigen::VectorXd pp = ap.colPivHouseholderQr().solve(bp);
  dpd.pre.gain_odd.assign(pg.data(), pg.data() + pg.size());
  dpd.pre.phase.resize(static_cast<std::size_t>(phase_terms));
  for (int j = 0; j < phase_terms; ++j) dpd.pre.phase[static_cast<std::size_t>(j)] = -pp(j);
  return dpd;
}

TxChain apply_dpd(const TxChain& chain, const DpdPolynomial& dpd) {
  Stage s = make_stage(stage::AmAmPm{dpd.pre}, kDpdLabel);
  s.fixed = true;
  s.tag.reset();
  return insert_correction(chain, std::move(s));
}

}  // namespace unisynth
