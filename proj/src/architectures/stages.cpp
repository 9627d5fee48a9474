#include <algorithm>
#include <cmath>
#include <random>

#include "unisynth/chain.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<cplx> copy_samples(const ComplexEnvelope& env) {
  return {env.samples().begin(), env.samples().end()};
}

// Applies f to |x| keeping the phase.
template <typename F>
ComplexEnvelope map_magnitude(const ComplexEnvelope& env, F&& f) {
  std::vector<cplx> out(env.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double a = std::abs(env[k]);
    const double b = std::max(0.0, f(a));
    out[k] = a > 0.0 ? env[k] * (b / a) : cplx(b, 0.0);
  }
  return env.with_samples(std::move(out));
}

ComplexEnvelope apply_polar(const stage::Polar& p, const ComplexEnvelope& env) {
  require(p.amp_bits == 0 || (p.amp_bits >= 4 && p.amp_bits <= 16), "polar amplitude bits must be in [4, 16]");
  require(p.phase_step >= 0.0, "polar phase step must be nonnegative");
  auto tracks = to_polar(env);
  const double fs = env.sample_rate();
  if (p.amp_bits > 0) {
    require(p.amp_full_scale > 0.0, "polar amplitude full scale must be positive");
    const double step = std::ldexp(p.amp_full_scale, -p.amp_bits);
    for (auto& a : tracks.amplitude) a = std::min(std::round(a / step) * step, p.amp_full_scale);
  }
  if (p.amp_cutoff_hz > 0.0) tracks.amplitude = one_pole_lowpass(tracks.amplitude, fs, p.amp_cutoff_hz);
  if (p.phase_step > 0.0)
    for (auto& ph : tracks.phase) ph = std::round(ph / p.phase_step) * p.phase_step;
  if (p.phase_cutoff_hz > 0.0) tracks.phase = one_pole_lowpass(tracks.phase, fs, p.phase_cutoff_hz);
  const double skew = p.path_delay - p.phase_advance;
  if (skew != 0.0) {
    require(std::abs(skew) < env.duration() / 4.0, "delay too large for record");
    tracks.phase = fractional_delay(tracks.phase, skew * fs);
  }
  for (auto& a : tracks.amplitude) a = std::max(a, 0.0);
  return from_polar(tracks);
}

ComplexEnvelope apply_zoh(const stage::Zoh& z, const ComplexEnvelope& env) {
  require(z.dac_rate_hz > 0.0, "DAC rate must be positive");
  const double ratio = env.sample_rate() / z.dac_rate_hz;
  const double hold_d = std::round(ratio);
  require(hold_d >= 1.0 && std::abs(ratio - hold_d) <= 1e-9 * ratio,
          "DAC rate must divide the sample rate");
  const auto hold = static_cast<std::size_t>(hold_d);
  if (hold == 1) return env;
  std::vector<cplx> out(env.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = env[(k / hold) * hold];
  return env.with_samples(std::move(out));
}

double trim_residual(double e, const stage::CodeMismatch& c) {
  const double step = 2.0 * c.trim_range / std::ldexp(1.0, c.trim_bits);
  const double correction = std::clamp(std::round(e / step) * step, -c.trim_range, c.trim_range);
  return e - correction;
}

ComplexEnvelope apply_code_mismatch(const stage::CodeMismatch& c, const ComplexEnvelope& env) {
  require(c.bits >= 4 && c.bits <= 16, "DAC bits must be in [4, 16]");
  require(c.full_scale > 0.0 && c.sigma >= 0.0, "invalid DAC mismatch parameters");
  require(!c.trim || (c.trim_bits >= 1 && c.trim_bits <= 24 && c.trim_range > 0.0), "invalid trim parameters");
  const long half = 1L << (c.bits - 1);
  const auto codes = static_cast<std::size_t>(2 * half + 1);
  std::vector<double> err_i(codes, 0.0), err_q(codes, 0.0);
  if (c.sigma > 0.0) {
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal(0.0, c.sigma);
    for (auto& e : err_i) e = normal(rng);
    for (auto& e : err_q) e = normal(rng);
    if (c.trim) {
      for (auto& e : err_i) e = trim_residual(e, c);
      for (auto& e : err_q) e = trim_residual(e, c);
    }
  }
  const double step = c.full_scale / static_cast<double>(half);
  auto convert = [&](double v, const std::vector<double>& err) {
    const double code = std::clamp(std::round(v / step), static_cast<double>(-half), static_cast<double>(half));
    const auto idx = static_cast<std::size_t>(static_cast<long>(code) + half);
    return code * step * (1.0 + err[idx]);
  };
  std::vector<cplx> out(env.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = {convert(env[k].real(), err_i), convert(env[k].imag(), err_q)};
  return env.with_samples(std::move(out));
}

ComplexEnvelope apply_harmonic(const stage::HarmonicMultiply& h, const ComplexEnvelope& env) {
  require(h.multiplier >= 2 && h.multiplier <= 4, "harmonic multiplier must be 2, 3 or 4");
  auto tracks = to_polar(env);
  for (auto& ph : tracks.phase) ph *= h.multiplier;
  return from_polar(tracks);
}

ComplexEnvelope apply_rise_fall(const stage::RiseFall& r, const ComplexEnvelope& env) {
  require(r.tau >= 0.0, "rise/fall time must be nonnegative");
  if (r.tau == 0.0) return env;
  auto tracks = to_polar(env);
  tracks.amplitude = one_pole_lowpass(tracks.amplitude, env.sample_rate(), 1.0 / (kTwoPi * r.tau));
  return from_polar(tracks);
}

ComplexEnvelope apply_spurs(const stage::SpurTones& s, const ComplexEnvelope& env) {
  if (s.spurs.empty()) return env;
  const double rms = std::sqrt(env.mean_power());
  auto out = copy_samples(env);
  for (const auto& spur : s.spurs) {
    require(std::abs(spur.offset_hz) < env.sample_rate() / 2.0, "spur offset beyond Nyquist");
    const double amp = rms * std::pow(10.0, spur.level_dbc / 20.0);
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] += std::polar(amp, kTwoPi * spur.offset_hz * env.time(k));
  }
  return env.with_samples(std::move(out));
}

ComplexEnvelope apply_state_errors(const stage::StateErrors& s, const ComplexEnvelope& env) {
  require(s.levels.size() == s.gain.size() && s.levels.size() == s.phase.size(),
          "state error table columns differ in length");
  if (s.levels.empty()) return env;
  std::vector<cplx> factor(s.levels.size());
  for (std::size_t i = 0; i < factor.size(); ++i) factor[i] = std::polar(1.0 + s.gain[i], s.phase[i]);
  auto out = copy_samples(env);
  for (auto& v : out) {
    const double a = std::abs(v);
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.levels.size(); ++i)
      if (std::abs(s.levels[i] - a) < std::abs(s.levels[best] - a)) best = i;
    v *= factor[best];
  }
  return env.with_samples(std::move(out));
}

double code_map_value(const stage::CodeMap& m, double a) {
  const double c = a / m.full_scale;
  const double u = (c - m.dip_center) / m.dip_width;
  return m.full_scale * ((c + m.cubic * c * c * c) / (1.0 + m.cubic) - m.dip_depth * std::exp(-u * u));
}

double table_value(const stage::AmplitudeTable& t, double a) {
  const auto& x = t.input;
  const auto& y = t.output;
  std::size_t hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), a) - x.begin());
  hi = std::clamp<std::size_t>(hi, 1, x.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = (a - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + w * (y[hi] - y[lo]);
}

void validate_table(const stage::AmplitudeTable& t) {
  require(t.input.size() == t.output.size() && t.input.size() >= 2,
          "amplitude table needs matching columns of at least two points");
  for (std::size_t k = 1; k < t.input.size(); ++k)
    require(t.input[k] > t.input[k - 1], "amplitude table inputs must be strictly increasing");
}

}  // namespace

const char* budget_term_name(BudgetTerm t) {
  switch (t) {
    case BudgetTerm::bw: return "bw";
    case BudgetTerm::amp: return "amp";
    case BudgetTerm::phase: return "phase";
    case BudgetTerm::pn: return "pn";
    case BudgetTerm::iq_lo: return "iq_lo";
  }
  return "?";
}

std::optional<BudgetTerm> budget_term_from_name(const std::string& name) {
  for (BudgetTerm t : kAllBudgetTerms)
    if (name == budget_term_name(t)) return t;
  return std::nullopt;
}

const char* architecture_name(Architecture a) {
  switch (a) {
    case Architecture::custom: return "custom";
    case Architecture::cartesian: return "cartesian";
    case Architecture::polar: return "polar";
    case Architecture::rfdac: return "rfdac";
    case Architecture::harmonic: return "harmonic";
  }
  return "?";
}

const char* stage_kind_name(const StageSpec& s) {
  return std::visit(
      overloaded{
          [](const stage::AmplitudeError&) { return "amplitude_error"; },
          [](const stage::StaticPhase&) { return "static_phase"; },
          [](const stage::PhaseNoise&) { return "phase_noise"; },
          [](const stage::IqImbalance&) { return "iq_imbalance"; },
          [](const stage::LoFeedthrough&) { return "lo_feedthrough"; },
          [](const stage::BandwidthLimit&) { return "bandwidth_limit"; },
          [](const stage::Quantize&) { return "quantize"; },
          [](const stage::SampleJitter&) { return "sample_jitter"; },
          [](const stage::AmAmPm&) { return "am_ampm"; },
          [](const stage::OnOffLeakage&) { return "onoff_leakage"; },
          [](const stage::PathSkew&) { return "path_skew"; },
          [](const stage::Delay&) { return "delay"; },
          [](const stage::PathGain&) { return "path_gain"; },
          [](const stage::Polar&) { return "polar"; },
          [](const stage::Zoh&) { return "zoh"; },
          [](const stage::CodeMismatch&) { return "code_mismatch"; },
          [](const stage::HarmonicMultiply&) { return "harmonic_multiply"; },
          [](const stage::RiseFall&) { return "rise_fall"; },
          [](const stage::SpurTones&) { return "spur_tones"; },
          [](const stage::StateErrors&) { return "state_errors"; },
          [](const stage::CodeMap&) { return "code_map"; },
          [](const stage::AmplitudeTable&) { return "amplitude_table"; },
          [](const stage::IqCorrection&) { return "iq_correction"; },
      },
      s);
}

std::optional<BudgetTerm> default_budget_tag(const StageSpec& s) {
  using BT = BudgetTerm;
  return std::visit(
      overloaded{
          [](const stage::AmplitudeError&) -> std::optional<BT> { return BT::amp; },
          [](const stage::StaticPhase&) -> std::optional<BT> { return BT::phase; },
          [](const stage::PhaseNoise&) -> std::optional<BT> { return BT::pn; },
          [](const stage::IqImbalance&) -> std::optional<BT> { return BT::iq_lo; },
          [](const stage::LoFeedthrough&) -> std::optional<BT> { return BT::iq_lo; },
          [](const stage::BandwidthLimit&) -> std::optional<BT> { return BT::bw; },
          [](const stage::Quantize&) -> std::optional<BT> { return BT::amp; },
          [](const stage::SampleJitter&) -> std::optional<BT> { return BT::pn; },
          [](const stage::AmAmPm&) -> std::optional<BT> { return BT::amp; },
          [](const stage::OnOffLeakage&) -> std::optional<BT> { return BT::iq_lo; },
          [](const stage::PathSkew&) -> std::optional<BT> { return BT::iq_lo; },
          [](const stage::PathGain&) -> std::optional<BT> { return BT::iq_lo; },
          [](const stage::CodeMismatch&) -> std::optional<BT> { return BT::amp; },
          [](const stage::RiseFall&) -> std::optional<BT> { return BT::bw; },
          [](const stage::StateErrors&) -> std::optional<BT> { return BT::amp; },
          [](const stage::CodeMap&) -> std::optional<BT> { return BT::amp; },
          [](const auto&) -> std::optional<BT> { return std::nullopt; },
      },
      s);
}

bool default_fixed(const StageSpec& s) {
  return std::holds_alternative<stage::Delay>(s) || std::holds_alternative<stage::AmplitudeTable>(s) ||
         std::holds_alternative<stage::IqCorrection>(s);
}

Stage make_stage(StageSpec spec, std::string label) {
  Stage st;
  st.tag = default_budget_tag(spec);
  st.fixed = default_fixed(spec);
  st.spec = std::move(spec);
  st.label = std::move(label);
  return st;
}

ComplexEnvelope apply_stage(const StageSpec& s, const ComplexEnvelope& env,
                            const ComplexEnvelope& chain_input) {
  return std::visit(
      overloaded{
          [&](const stage::AmplitudeError& v) { return amplitude_error(env, v.eps); },
          [&](const stage::StaticPhase& v) { return static_phase_error(env, v.phi); },
          [&](const stage::PhaseNoise& v) { return phase_noise(env, v.rate, v.seed); },
          [&](const stage::IqImbalance& v) { return iq_imbalance(env, v.gain, v.skew); },
          [&](const stage::LoFeedthrough& v) { return lo_feedthrough(env, v.offset); },
          [&](const stage::BandwidthLimit& v) { return bandwidth_limit(env, v.cutoff_hz); },
          [&](const stage::Quantize& v) { return quantize(env, v.bits, v.full_scale); },
          [&](const stage::SampleJitter& v) { return sample_jitter(env, v.sigma, v.seed); },
          [&](const stage::AmAmPm& v) { return am_ampm(env, v.poly); },
          [&](const stage::OnOffLeakage& v) {
            require(chain_input.size() == env.size(), "gate mask length does not match envelope");
            std::vector<std::uint8_t> mask(env.size());
            for (std::size_t k = 0; k < mask.size(); ++k)
              mask[k] = std::abs(chain_input[k]) > v.threshold ? 1 : 0;
            return onoff_leakage(env, v.off_ratio_db, mask, v.cancel);
          },
          [&](const stage::PathSkew& v) { return path_skew(env, v.tau_i, v.tau_q); },
          [&](const stage::Delay& v) { return fractional_delay(env, v.tau); },
          [&](const stage::PathGain& v) {
            if (v.gain_i == 1.0 && v.gain_q == 1.0) return env;
            auto out = copy_samples(env);
            for (auto& x : out) x = {x.real() * v.gain_i, x.imag() * v.gain_q};
            return env.with_samples(std::move(out));
          },
          [&](const stage::Polar& v) { return apply_polar(v, env); },
          [&](const stage::Zoh& v) { return apply_zoh(v, env); },
          [&](const stage::CodeMismatch& v) { return apply_code_mismatch(v, env); },
          [&](const stage::HarmonicMultiply& v) { return apply_harmonic(v, env); },
          [&](const stage::RiseFall& v) { return apply_rise_fall(v, env); },
          [&](const stage::SpurTones& v) { return apply_spurs(v, env); },
          [&](const stage::StateErrors& v) { return apply_state_errors(v, env); },
          [&](const stage::CodeMap& v) {
            require(v.full_scale > 0.0 && v.dip_width > 0.0 && v.cubic > -1.0, "invalid code map");
            if (v.cubic == 0.0 && v.dip_depth == 0.0) return env;
            return map_magnitude(env, [&](double a) { return code_map_value(v, a); });
          },
          [&](const stage::AmplitudeTable& v) {
            validate_table(v);
            return map_magnitude(env, [&](double a) { return table_value(v, a); });
          },
          [&](const stage::IqCorrection& v) {
            if (v.m00 == 1.0 && v.m01 == 0.0 && v.m10 == 0.0 && v.m11 == 1.0 && v.offset == cplx{})
              return env;
            auto out = copy_samples(env);
            for (auto& x : out) {
              const double i = x.real();
              const double q = x.imag();
              x = cplx(v.m00 * i + v.m01 * q, v.m10 * i + v.m11 * q) + v.offset;
            }
            return env.with_samples(std::move(out));
          },
      },
      s);
}

ComplexEnvelope run_chain(const TxChain& chain, const ComplexEnvelope& env) {
  ComplexEnvelope x = env;
  for (const auto& st : chain.stages) x = apply_stage(st.spec, x, env);
  return x;
}

std::vector<std::string> chain_warnings(const TxChain& chain, double max_amplitude) {
  std::vector<std::string> warnings;
  for (std::size_t k = 0; k < chain.stages.size(); ++k) {
    if (const auto* p = std::get_if<stage::AmAmPm>(&chain.stages[k].spec)) {
      if (!p->poly.monotone_on(max_amplitude))
        warnings.push_back("stage " + std::to_string(k) +
                           " (am_ampm): AM-AM curve is non-monotone on the operating range");
    }
    if (const auto* m = std::get_if<stage::CodeMap>(&chain.stages[k].spec)) {
      constexpr int kPoints = 1024;
      double prev = 0.0;
      for (int i = 1; i <= kPoints; ++i) {
        const double v = code_map_value(*m, max_amplitude * i / kPoints);
        if (v < prev) {
          warnings.push_back("stage " + std::to_string(k) +
                             " (code_map): code-to-amplitude map is non-monotone");
          break;
        }
        prev = v;
      }
    }
  }
  return warnings;
}

}  // namespace unisynth
