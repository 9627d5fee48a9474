#include <cmath>

#include "unisynth/chain.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

// Split I/Q, per-path gain and delay, bandwidth, quantizer, then recombine
// through the modulator's I/Q imbalance and LO feedthrough.
TxChain cartesian_chain(const CartesianConfig& cfg) {
  TxChain chain;
  chain.architecture = Architecture::cartesian;
  auto& s = chain.stages;
  if (cfg.gain_i != 1.0 || cfg.gain_q != 1.0)
    s.push_back(make_stage(stage::PathGain{cfg.gain_i, cfg.gain_q}));
  if (cfg.skew_i != 0.0 || cfg.skew_q != 0.0)
    s.push_back(make_stage(stage::PathSkew{cfg.skew_i, cfg.skew_q}));
  if (cfg.cutoff_hz > 0.0) s.push_back(make_stage(stage::BandwidthLimit{cfg.cutoff_hz}));
  if (cfg.quant_bits > 0) s.push_back(make_stage(stage::Quantize{cfg.quant_bits, cfg.quant_full_scale}));
  if (cfg.iq_gain != 0.0 || cfg.iq_skew != 0.0)
    s.push_back(make_stage(stage::IqImbalance{cfg.iq_gain, cfg.iq_skew}));
  if (cfg.lo_offset != cplx{}) s.push_back(make_stage(stage::LoFeedthrough{cfg.lo_offset}));
  return chain;
}

TxChain polar_chain(const PolarConfig& cfg) {
  require(cfg.polar.amp_bits == 0 || cfg.polar.amp_bits >= 4, "polar amplitude bits must be at least 4");
  require(cfg.polar.phase_step >= 0.0, "polar phase step must be nonnegative");
  TxChain chain;
  chain.architecture = Architecture::polar;
  chain.stages.push_back(make_stage(cfg.polar));
  if (!std::isinf(cfg.off_ratio_db) || cfg.leak_cancel != cplx{})
    chain.stages.push_back(
        make_stage(stage::OnOffLeakage{cfg.off_ratio_db, cfg.on_threshold, cfg.leak_cancel}));
  return chain;
}

TxChain rfdac_chain(const RfdacConfig& cfg) {
  TxChain chain;
  chain.architecture = Architecture::rfdac;
  if (cfg.dac_bits > 0) {
    require(cfg.dac_bits >= 4, "DAC bits must be at least 4");
    stage::CodeMismatch cm;
    cm.bits = cfg.dac_bits;
    cm.full_scale = cfg.full_scale;
    cm.sigma = cfg.mismatch_sigma;
    cm.seed = cfg.seed;
    cm.trim = cfg.trim;
    cm.trim_bits = cfg.trim_bits;
    cm.trim_range = cfg.trim_range;
    chain.stages.push_back(make_stage(cm));
  } else {
    require(cfg.mismatch_sigma == 0.0, "cell mismatch requires a finite DAC resolution");
  }
  if (cfg.dac_rate_hz > 0.0) chain.stages.push_back(make_stage(stage::Zoh{cfg.dac_rate_hz}));
  if (cfg.recon_cutoff_hz > 0.0)
    chain.stages.push_back(make_stage(stage::BandwidthLimit{cfg.recon_cutoff_hz}));
  return chain;
}

// LO phase noise enters before multiplication so it is scaled by M.
TxChain harmonic_chain(const HarmonicConfig& cfg) {
  if (cfg.multiplier < 2 || cfg.multiplier > 4)
    throw PreconditionError("harmonic multiplier must be 2, 3 or 4");
  require(cfg.rise_fall >= 0.0, "rise/fall time must be nonnegative");
  TxChain chain;
  chain.architecture = Architecture::harmonic;
  if (cfg.lo_phase_noise_rate > 0.0)
    chain.stages.push_back(make_stage(stage::PhaseNoise{cfg.lo_phase_noise_rate, cfg.seed}));
  chain.stages.push_back(make_stage(stage::HarmonicMultiply{cfg.multiplier}));
  if (cfg.rise_fall > 0.0) chain.stages.push_back(make_stage(stage::RiseFall{cfg.rise_fall}));
  if (!cfg.spurs.empty()) chain.stages.push_back(make_stage(stage::SpurTones{cfg.spurs}));
  if (!cfg.constant_impedance && !cfg.state_errors.levels.empty())
    chain.stages.push_back(make_stage(cfg.state_errors));
  return chain;
}

}  // namespace unisynth
