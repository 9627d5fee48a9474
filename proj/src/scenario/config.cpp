#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

#include "unisynth/error.hpp"
#include "unisynth/scenario.hpp"

namespace unisynth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Typed JSON conversion with error locations.

template <class T>
struct Tag {};

double convert(const Json& j, const std::string& at, Tag<double>) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  if (!j.is_number()) throw ConfigError(at, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(at, "number must be finite");
  return v;
}

int convert(const Json& j, const std::string& at, Tag<int>) {
  if (!j.is_number_integer()) throw ConfigError(at, "expected an integer");
  const auto v = j.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(at, "integer out of range");
  return static_cast<int>(v);
}

std::uint64_t convert(const Json& j, const std::string& at, Tag<std::uint64_t>) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
  throw ConfigError(at, "expected a nonnegative integer");
}

bool convert(const Json& j, const std::string& at, Tag<bool>) {
  if (!j.is_boolean()) throw ConfigError(at, "expected true or false");
  return j.get<bool>();
}

std::string convert(const Json& j, const std::string& at, Tag<std::string>) {
  if (!j.is_string()) throw ConfigError(at, "expected a string");
  return j.get<std::string>();
}

cplx convert(const Json& j, const std::string& at, Tag<cplx>) {
  if (j.is_number()) return {convert(j, at, Tag<double>{}), 0.0};
  if (!j.is_array() || j.size() != 2) throw ConfigError(at, "expected [re, im]");
  return {convert(j[0], at + "/0", Tag<double>{}), convert(j[1], at + "/1", Tag<double>{})};
}

std::vector<double> convert(const Json& j, const std::string& at, Tag<std::vector<double>>) {
  if (!j.is_array()) throw ConfigError(at, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(convert(j[i], at + "/" + std::to_string(i), Tag<double>{}));
  return out;
}

class Reader;
std::vector<stage::Spur> convert(const Json& j, const std::string& at, Tag<std::vector<stage::Spur>>);

// Object reader that rejects unknown keys on finish().
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  std::string at(const std::string& k) const { return path_ + "/" + k; }
  const std::string& path() const { return path_; }

  const Json& raw(const std::string& k) {
    if (!has(k)) throw ConfigError(at(k), "required key is missing");
    used_.insert(k);
    return j_.at(k);
  }

  template <class T>
  T req(const std::string& k) {
    return convert(raw(k), at(k), Tag<T>{});
  }

  template <class T>
  T opt(const std::string& k, T fallback) {
    if (!has(k)) return fallback;
    return req<T>(k);
  }

  template <class T>
  void field(const std::string& k, T& v, bool required = false) {
    if (required || has(k)) v = req<T>(k);
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key())) throw ConfigError(at(item.key()), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<stage::Spur> convert(const Json& j, const std::string& at, Tag<std::vector<stage::Spur>>) {
  if (!j.is_array()) throw ConfigError(at, "expected an array of spurs");
  std::vector<stage::Spur> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Reader r(j[i], at + "/" + std::to_string(i));
    stage::Spur s;
    r.field("offset_hz", s.offset_hz, true);
    r.field("level_dbc", s.level_dbc, true);
    r.finish();
    out.push_back(s);
  }
  return out;
}

// Serialization of field values.

Json to_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
Json to_value(int v) { return v; }
Json to_value(std::uint64_t v) { return v; }
Json to_value(bool v) { return v; }
Json to_value(cplx v) { return Json::array({v.real(), v.imag()}); }
Json to_value(const std::vector<double>& v) { return v; }
Json to_value(const std::vector<stage::Spur>& v) {
  Json a = Json::array();
  for (const auto& s : v) a.push_back({{"offset_hz", s.offset_hz}, {"level_dbc", s.level_dbc}});
  return a;
}

// Field lists shared by parsing and serialization. `f(name, ref, required)`.

template <class F> void fields(stage::AmplitudeError& s, F&& f) { f("eps", s.eps, false); }
template <class F> void fields(stage::StaticPhase& s, F&& f) { f("phi", s.phi, false); }
template <class F> void fields(stage::PhaseNoise& s, F&& f) {
  f("rate", s.rate, false);
  f("seed", s.seed, true);
}
template <class F> void fields(stage::IqImbalance& s, F&& f) {
  f("gain", s.gain, false);
  f("skew", s.skew, false);
}
template <class F> void fields(stage::LoFeedthrough& s, F&& f) { f("offset", s.offset, false); }
template <class F> void fields(stage::BandwidthLimit& s, F&& f) { f("cutoff_hz", s.cutoff_hz, true); }
template <class F> void fields(stage::Quantize& s, F&& f) {
  f("bits", s.bits, false);
  f("full_scale", s.full_scale, false);
}
template <class F> void fields(stage::SampleJitter& s, F&& f) {
  f("sigma", s.sigma, false);
  f("seed", s.seed, true);
}
template <class F> void fields(stage::AmAmPm& s, F&& f) {
  f("gain_odd", s.poly.gain_odd, false);
  f("phase", s.poly.phase, false);
}
template <class F> void fields(stage::OnOffLeakage& s, F&& f) {
  f("off_ratio_db", s.off_ratio_db, false);
  f("threshold", s.threshold, false);
  f("cancel", s.cancel, false);
}
template <class F> void fields(stage::PathSkew& s, F&& f) {
  f("tau_i", s.tau_i, false);
  f("tau_q", s.tau_q, false);
}
template <class F> void fields(stage::Delay& s, F&& f) { f("tau", s.tau, false); }
template <class F> void fields(stage::PathGain& s, F&& f) {
  f("gain_i", s.gain_i, false);
  f("gain_q", s.gain_q, false);
}
template <class F> void fields(stage::Polar& s, F&& f) {
  f("amp_bits", s.amp_bits, false);
  f("amp_full_scale", s.amp_full_scale, false);
  f("phase_step", s.phase_step, false);
  f("path_delay", s.path_delay, false);
  f("phase_advance", s.phase_advance, false);
  f("amp_cutoff_hz", s.amp_cutoff_hz, false);
  f("phase_cutoff_hz", s.phase_cutoff_hz, false);
}
template <class F> void fields(stage::Zoh& s, F&& f) { f("dac_rate_hz", s.dac_rate_hz, true); }
template <class F> void fields(stage::CodeMismatch& s, F&& f) {
  f("bits", s.bits, false);
  f("full_scale", s.full_scale, false);
  f("sigma", s.sigma, false);
  f("seed", s.seed, true);
  f("trim", s.trim, false);
  f("trim_bits", s.trim_bits, false);
  f("trim_range", s.trim_range, false);
}
template <class F> void fields(stage::HarmonicMultiply& s, F&& f) { f("multiplier", s.multiplier, false); }
template <class F> void fields(stage::RiseFall& s, F&& f) { f("tau", s.tau, false); }
template <class F> void fields(stage::SpurTones& s, F&& f) { f("spurs", s.spurs, false); }
template <class F> void fields(stage::StateErrors& s, F&& f) {
  f("levels", s.levels, true);
  f("gain", s.gain, false);
  f("phase", s.phase, false);
}
template <class F> void fields(stage::CodeMap& s, F&& f) {
  f("cubic", s.cubic, false);
  f("dip_center", s.dip_center, false);
  f("dip_depth", s.dip_depth, false);
  f("dip_width", s.dip_width, false);
  f("full_scale", s.full_scale, false);
}
template <class F> void fields(stage::AmplitudeTable& s, F&& f) {
  f("input", s.input, true);
  f("output", s.output, true);
}
template <class F> void fields(stage::IqCorrection& s, F&& f) {
  f("m00", s.m00, false);
  f("m01", s.m01, false);
  f("m10", s.m10, false);
  f("m11", s.m11, false);
  f("offset", s.offset, false);
}

std::optional<StageSpec> default_stage(const std::string& kind) {
  std::optional<StageSpec> out;
  [&]<std::size_t... I>(std::index_sequence<I...>) {
    (
        [&] {
          if (out) return;
          StageSpec s(std::in_place_index<I>);
          if (kind == stage_kind_name(s)) out = s;
        }(),
        ...);
  }(std::make_index_sequence<std::variant_size_v<StageSpec>>{});
  return out;
}

// Wraps library precondition failures raised while validating config values.
template <class F>
auto checked(const std::string& at, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(at, e.what());
  }
}

void validate_stage(const StageSpec& spec, const std::string& at) {
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, stage::HarmonicMultiply>) {
          if (s.multiplier < 2 || s.multiplier > 4) throw ConfigError(at + "/multiplier", "must be 2, 3 or 4");
        } else if constexpr (std::is_same_v<S, stage::Quantize>) {
          if (s.bits < 2 || s.bits > 16) throw ConfigError(at + "/bits", "must be in [2, 16]");
          if (!(s.full_scale > 0)) throw ConfigError(at + "/full_scale", "must be positive");
        } else if constexpr (std::is_same_v<S, stage::PhaseNoise>) {
          if (s.rate < 0) throw ConfigError(at + "/rate", "must be nonnegative");
        } else if constexpr (std::is_same_v<S, stage::SampleJitter>) {
          if (s.sigma < 0) throw ConfigError(at + "/sigma", "must be nonnegative");
        } else if constexpr (std::is_same_v<S, stage::BandwidthLimit>) {
          if (!(s.cutoff_hz > 0)) throw ConfigError(at + "/cutoff_hz", "must be positive");
        } else if constexpr (std::is_same_v<S, stage::Zoh>) {
          if (!(s.dac_rate_hz > 0)) throw ConfigError(at + "/dac_rate_hz", "must be positive");
        } else if constexpr (std::is_same_v<S, stage::AmplitudeTable>) {
          if (s.input.size() != s.output.size() || s.input.size() < 2)
            throw ConfigError(at, "input and output need equal length of at least 2");
          for (std::size_t k = 1; k < s.input.size(); ++k)
            if (!(s.input[k] > s.input[k - 1])) throw ConfigError(at + "/input", "must be strictly increasing");
        } else if constexpr (std::is_same_v<S, stage::StateErrors>) {
          if (s.levels.empty()) throw ConfigError(at + "/levels", "must not be empty");
          if ((!s.gain.empty() && s.gain.size() != s.levels.size()) ||
              (!s.phase.empty() && s.phase.size() != s.levels.size()))
            throw ConfigError(at, "gain and phase must match levels in length");
        } else if constexpr (std::is_same_v<S, stage::CodeMismatch>) {
          if (s.bits < 2 || s.bits > 16) throw ConfigError(at + "/bits", "must be in [2, 16]");
          if (s.sigma < 0) throw ConfigError(at + "/sigma", "must be nonnegative");
        } else if constexpr (std::is_same_v<S, stage::AmAmPm>) {
          if (s.poly.gain_odd.empty()) throw ConfigError(at + "/gain_odd", "must not be empty");
        }
      },
      spec);
}

// Enumerations.

const char* side_name(Side s) {
  switch (s) {
    case Side::comm: return "comm";
    case Side::qubit: return "qubit";
    case Side::both: return "both";
  }
  return "?";
}

const char* pulse_kind_name(PulseKind k) {
  switch (k) {
    case PulseKind::rect: return "rect";
    case PulseKind::sinc: return "sinc";
    case PulseKind::raised_cosine: return "raised_cosine";
    case PulseKind::root_raised_cosine: return "root_raised_cosine";
    case PulseKind::gaussian: return "gaussian";
  }
  return "?";
}

const char* gate_shape_name(GateShape s) {
  switch (s) {
    case GateShape::rect: return "rect";
    case GateShape::gaussian: return "gaussian";
    case GateShape::cosine: return "cosine";
  }
  return "?";
}

template <class E, std::size_t N>
E enum_from(const std::string& name, const E (&all)[N], const char* (*namer)(E), const std::string& at) {
  for (E e : all)
    if (name == namer(e)) return e;
  throw ConfigError(at, "unknown value '" + name + "'");
}

constexpr Side kSides[] = {Side::comm, Side::qubit, Side::both};
constexpr PulseKind kPulseKinds[] = {PulseKind::rect, PulseKind::sinc, PulseKind::raised_cosine,
                                     PulseKind::root_raised_cosine, PulseKind::gaussian};
constexpr GateShape kGateShapes[] = {GateShape::rect, GateShape::gaussian, GateShape::cosine};
constexpr Architecture kArchitectures[] = {Architecture::custom, Architecture::cartesian, Architecture::polar,
                                           Architecture::rfdac, Architecture::harmonic};

// Modulation and pulse.

ModulationScheme parse_modulation(const Json& j, const std::string& at) {
  Reader r(j, at);
  const auto name = r.req<std::string>("scheme");
  ModulationScheme m;
  if (name == "ask") m = scheme::MAsk{r.req<int>("order")};
  else if (name == "psk") m = scheme::MPsk{r.req<int>("order")};
  else if (name == "qam") m = scheme::SquareQam{r.req<int>("order")};
  else if (name == "qpsk_sum") m = scheme::QpskSum{r.req<std::vector<double>>("ratios")};
  else if (name == "star_qam") m = scheme::StarQam{r.req<int>("rings"), r.req<int>("phases")};
  else if (name == "multi_level") m = scheme::MultiLevel{r.req<int>("levels")};
  else throw ConfigError(r.at("scheme"), "unknown scheme '" + name + "'");
  r.finish();
  checked(at, [&] { return build_constellation(m); });
  return m;
}

Json modulation_to_json(const ModulationScheme& m) {
  return std::visit(
      [](const auto& s) -> Json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, scheme::MAsk>) return {{"scheme", "ask"}, {"order", s.order}};
        else if constexpr (std::is_same_v<S, scheme::MPsk>) return {{"scheme", "psk"}, {"order", s.order}};
        else if constexpr (std::is_same_v<S, scheme::SquareQam>) return {{"scheme", "qam"}, {"order", s.order}};
        else if constexpr (std::is_same_v<S, scheme::QpskSum>) return {{"scheme", "qpsk_sum"}, {"ratios", s.ratios}};
        else if constexpr (std::is_same_v<S, scheme::StarQam>)
          return {{"scheme", "star_qam"}, {"rings", s.rings}, {"phases", s.phases}};
        else return {{"scheme", "multi_level"}, {"levels", s.levels}};
      },
      m);
}

PulseShape parse_pulse(const Json& j, const std::string& at) {
  Reader r(j, at);
  PulseShape p;
  p.kind = enum_from(r.req<std::string>("kind"), kPulseKinds, pulse_kind_name, r.at("kind"));
  r.field("rolloff", p.rolloff);
  r.field("span_symbols", p.span_symbols);
  r.field("samples_per_symbol", p.samples_per_symbol);
  r.finish();
  checked(at, [&] { p.validate(); return 0; });
  return p;
}

CommSetup parse_comm(const Json& j, const std::string& at) {
  Reader r(j, at);
  CommSetup c;
  c.scheme = parse_modulation(r.raw("modulation"), r.at("modulation"));
  c.shape = parse_pulse(r.raw("pulse"), r.at("pulse"));
  c.symbol_rate = r.req<double>("symbol_rate_hz");
  if (!(c.symbol_rate > 0)) throw ConfigError(r.at("symbol_rate_hz"), "must be positive");
  c.n_symbols = static_cast<std::size_t>(r.req<std::uint64_t>("n_symbols"));
  if (c.n_symbols <= 2 * c.shape.guard_symbols() + 8)
    throw ConfigError(r.at("n_symbols"), "too few symbols for the pulse span");
  c.bit_seed = r.req<std::uint64_t>("bit_seed");
  if (r.has("equalizer")) {
    Reader e(r.raw("equalizer"), r.at("equalizer"));
    c.equalizer_taps = e.req<int>("taps");
    if (*c.equalizer_taps < 1 || *c.equalizer_taps % 2 == 0)
      throw ConfigError(e.at("taps"), "must be a positive odd integer");
    e.field("step", c.equalizer_step);
    if (!(c.equalizer_step > 0)) throw ConfigError(e.at("step"), "must be positive");
    e.finish();
  }
  r.finish();
  return c;
}

Json comm_to_json(const CommSetup& c) {
  Json j = {{"modulation", modulation_to_json(c.scheme)},
            {"pulse",
             {{"kind", pulse_kind_name(c.shape.kind)},
              {"rolloff", c.shape.rolloff},
              {"span_symbols", c.shape.span_symbols},
              {"samples_per_symbol", c.shape.samples_per_symbol}}},
            {"symbol_rate_hz", c.symbol_rate},
            {"n_symbols", c.n_symbols},
            {"bit_seed", c.bit_seed}};
  if (c.equalizer_taps) j["equalizer"] = {{"taps", *c.equalizer_taps}, {"step", c.equalizer_step}};
  return j;
}

QubitScenario parse_qubit(const Json& j, const std::string& at) {
  Reader r(j, at);
  QubitScenario q;
  {
    Reader m(r.raw("model"), r.at("model"));
    m.field("levels", q.model.levels);
    m.field("detuning", q.model.detuning);
    m.field("anharmonicity", q.model.anharmonicity);
    m.field("drive_gain", q.model.drive_gain, true);
    m.finish();
    checked(m.path(), [&] { q.model.validate(); return 0; });
  }
  {
    Reader g(r.raw("gate"), r.at("gate"));
    g.field("theta", q.gate.theta);
    g.field("axis_phase", q.gate.axis_phase);
    g.field("duration", q.gate.duration, true);
    g.finish();
    checked(g.path(), [&] { q.gate.validate(); return 0; });
  }
  {
    Reader e(r.raw("envelope"), r.at("envelope"));
    q.envelope.shape = enum_from(e.req<std::string>("shape"), kGateShapes, gate_shape_name, e.at("shape"));
    e.field("sigma_fraction", q.envelope.sigma_fraction);
    e.field("drag", q.envelope.drag_enabled);
    e.field("drag_coefficient", q.envelope.drag_coefficient);
    e.finish();
  }
  r.field("samples_per_gate", q.samples_per_gate);
  if (q.samples_per_gate < 64) throw ConfigError(r.at("samples_per_gate"), "must be at least 64");
  r.finish();
  q.envelope.duration = q.gate.duration;
  q.envelope.peak_amplitude = nominal_peak_amplitude(q.gate, q.envelope, q.model.drive_gain);
  checked(r.at("envelope"), [&] { q.envelope.validate(); return 0; });
  return q;
}

Json qubit_to_json(const QubitScenario& q) {
  return {{"model",
           {{"levels", q.model.levels},
            {"detuning", q.model.detuning},
            {"anharmonicity", q.model.anharmonicity},
            {"drive_gain", q.model.drive_gain}}},
          {"gate", {{"theta", q.gate.theta}, {"axis_phase", q.gate.axis_phase}, {"duration", q.gate.duration}}},
          {"envelope",
           {{"shape", gate_shape_name(q.envelope.shape)},
            {"sigma_fraction", q.envelope.sigma_fraction},
            {"drag", q.envelope.drag_enabled},
            {"drag_coefficient", q.envelope.drag_coefficient}}},
          {"samples_per_gate", q.samples_per_gate}};
}

// Architecture parameters.

TxChain parse_params(Architecture a, const Json& j, const std::string& at) {
  Reader r(j, at);
  TxChain chain;
  switch (a) {
    case Architecture::cartesian: {
      CartesianConfig c;
      r.field("gain_i", c.gain_i);
      r.field("gain_q", c.gain_q);
      r.field("skew_i", c.skew_i);
      r.field("skew_q", c.skew_q);
      r.field("iq_gain", c.iq_gain);
      r.field("iq_skew", c.iq_skew);
      r.field("lo_offset", c.lo_offset);
      r.field("cutoff_hz", c.cutoff_hz);
      r.field("quant_bits", c.quant_bits);
      r.field("quant_full_scale", c.quant_full_scale);
      r.finish();
      chain = checked(at, [&] { return cartesian_chain(c); });
      break;
    }
    case Architecture::polar: {
      PolarConfig c;
      fields(c.polar, [&](const char* k, auto& v, bool req) { r.field(k, v, req); });
      r.field("off_ratio_db", c.off_ratio_db);
      r.field("on_threshold", c.on_threshold);
      r.field("leak_cancel", c.leak_cancel);
      r.finish();
      chain = checked(at, [&] { return polar_chain(c); });
      break;
    }
    case Architecture::rfdac: {
      RfdacConfig c;
      r.field("dac_bits", c.dac_bits);
      r.field("full_scale", c.full_scale);
      r.field("dac_rate_hz", c.dac_rate_hz);
      r.field("mismatch_sigma", c.mismatch_sigma);
      r.field("seed", c.seed, c.mismatch_sigma > 0);
      r.field("trim", c.trim);
      r.field("trim_bits", c.trim_bits);
      r.field("trim_range", c.trim_range);
      r.field("recon_cutoff_hz", c.recon_cutoff_hz);
      r.finish();
      chain = checked(at, [&] { return rfdac_chain(c); });
      break;
    }
    case Architecture::harmonic: {
      HarmonicConfig c;
      r.field("multiplier", c.multiplier);
      r.field("lo_phase_noise_rate", c.lo_phase_noise_rate);
      r.field("seed", c.seed, c.lo_phase_noise_rate > 0);
      r.field("rise_fall", c.rise_fall);
      r.field("spurs", c.spurs);
      r.field("constant_impedance", c.constant_impedance);
      if (r.has("state_errors")) {
        Reader s(r.raw("state_errors"), r.at("state_errors"));
        fields(c.state_errors, [&](const char* k, auto& v, bool req) { s.field(k, v, req); });
        s.finish();
      }
      r.finish();
      chain = checked(at, [&] { return harmonic_chain(c); });
      break;
    }
    case Architecture::custom:
      throw ConfigError(at, "custom chains take an explicit stage list");
  }
  for (std::size_t k = 0; k < chain.stages.size(); ++k) validate_stage(chain.stages[k].spec, at);
  return chain;
}

std::vector<Stage> parse_stage_list(const Json& j, const std::string& at) {
  if (!j.is_array()) throw ConfigError(at, "expected an array of stages");
  std::vector<Stage> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(stage_from_json(j[i], at + "/" + std::to_string(i)));
  return out;
}

// Analysis and calibration sections.

AnalysisSpec parse_analysis(const Json& j, const std::string& at) {
  Reader r(j, at);
  AnalysisSpec a;
  a.psd_segment = static_cast<std::size_t>(r.opt<std::uint64_t>("psd_segment", a.psd_segment));
  if (a.psd_segment < 16) throw ConfigError(r.at("psd_segment"), "must be at least 16");
  r.field("psd_overlap", a.psd_overlap);
  if (a.psd_overlap < 0 || a.psd_overlap >= 1) throw ConfigError(r.at("psd_overlap"), "must be in [0, 1)");
  if (r.has("irr_test_hz")) a.irr_test_hz = r.req<double>("irr_test_hz");
  if (r.has("sfdr_carrier_hz")) a.sfdr_carrier_hz = r.req<double>("sfdr_carrier_hz");
  r.field("sfdr_band_lo_hz", a.sfdr_band_lo_hz);
  r.field("sfdr_band_hi_hz", a.sfdr_band_hi_hz);
  r.finish();
  return a;
}

Json analysis_to_json(const AnalysisSpec& a) {
  Json j = {{"psd_segment", a.psd_segment},
            {"psd_overlap", a.psd_overlap},
            {"sfdr_band_lo_hz", a.sfdr_band_lo_hz},
            {"sfdr_band_hi_hz", a.sfdr_band_hi_hz}};
  if (a.irr_test_hz) j["irr_test_hz"] = *a.irr_test_hz;
  if (a.sfdr_carrier_hz) j["sfdr_carrier_hz"] = *a.sfdr_carrier_hz;
  return j;
}

CalibrationSpec parse_calibration(const Json& j, const std::string& at) {
  Reader r(j, at);
  CalibrationSpec c;
  if (r.has("rabi")) {
    Reader s(r.raw("rabi"), r.at("rabi"));
    if (s.has("max_code")) c.rabi_max_code = s.req<double>("max_code");
    s.field("points", c.rabi_points);
    s.field("max_residual_rad", c.rabi_max_residual_rad);
    if (c.rabi_points < 3) throw ConfigError(s.at("points"), "must be at least 3");
    s.finish();
  }
  if (r.has("iq")) {
    Reader s(r.raw("iq"), r.at("iq"));
    if (s.has("test_hz")) c.iq_test_hz = s.req<double>("test_hz");
    s.field("amplitude", c.iq_amplitude);
    c.iq_n = static_cast<std::size_t>(s.opt<std::uint64_t>("n", c.iq_n));
    s.finish();
  }
  if (r.has("polar_delay")) {
    Reader s(r.raw("polar_delay"), r.at("polar_delay"));
    s.field("resolution", c.polar_resolution);
    s.field("range", c.polar_range);
    s.finish();
  }
  if (r.has("dpd")) {
    Reader s(r.raw("dpd"), r.at("dpd"));
    s.field("max_amplitude", c.dpd_max_amplitude);
    s.field("points", c.dpd_points);
    s.field("order", c.dpd_order);
    if (c.dpd_order < 1 || c.dpd_order > 7 || c.dpd_order % 2 == 0)
      throw ConfigError(s.at("order"), "must be odd and at most 7");
    s.finish();
  }
  if (r.has("leakage")) {
    Reader s(r.raw("leakage"), r.at("leakage"));
    s.field("bursts", c.leakage_bursts);
    c.leakage_on = static_cast<std::size_t>(s.opt<std::uint64_t>("on_samples", c.leakage_on));
    c.leakage_off = static_cast<std::size_t>(s.opt<std::uint64_t>("off_samples", c.leakage_off));
    s.finish();
  }
  r.finish();
  return c;
}

Json calibration_to_json(const CalibrationSpec& c) {
  Json rabi = {{"points", c.rabi_points}, {"max_residual_rad", c.rabi_max_residual_rad}};
  if (c.rabi_max_code) rabi["max_code"] = *c.rabi_max_code;
  Json iq = {{"amplitude", c.iq_amplitude}, {"n", c.iq_n}};
  if (c.iq_test_hz) iq["test_hz"] = *c.iq_test_hz;
  return {{"rabi", rabi},
          {"iq", iq},
          {"polar_delay", {{"resolution", c.polar_resolution}, {"range", c.polar_range}}},
          {"dpd", {{"max_amplitude", c.dpd_max_amplitude}, {"points", c.dpd_points}, {"order", c.dpd_order}}},
          {"leakage", {{"bursts", c.leakage_bursts}, {"on_samples", c.leakage_on}, {"off_samples", c.leakage_off}}}};
}

}  // namespace

bool Scenario::wants(const std::string& metric) const {
  return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
}

Stage stage_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  const auto kind = r.req<std::string>("kind");
  auto spec = default_stage(kind);
  if (!spec) throw ConfigError(r.at("kind"), "unknown stage kind '" + kind + "'");
  std::visit([&](auto& s) { fields(s, [&](const char* k, auto& v, bool req) { r.field(k, v, req); }); }, *spec);
  validate_stage(*spec, path);
  Stage st = make_stage(*spec, r.opt<std::string>("label", ""));
  if (r.has("tag")) {
    const Json& t = r.raw("tag");
    if (t.is_null()) {
      st.tag.reset();
    } else {
      const auto name = convert(t, r.at("tag"), Tag<std::string>{});
      st.tag = budget_term_from_name(name);
      if (!st.tag) throw ConfigError(r.at("tag"), "unknown budget term '" + name + "'");
    }
  }
  r.field("fixed", st.fixed);
  r.finish();
  return st;
}

Json stage_to_json(const Stage& s) {
  Json j = {{"kind", stage_kind_name(s.spec)}};
  StageSpec copy = s.spec;
  std::visit([&](auto& st) { fields(st, [&](const char* k, auto& v, bool) { j[k] = to_value(v); }); }, copy);
  j["tag"] = s.tag ? Json(budget_term_name(*s.tag)) : Json(nullptr);
  j["fixed"] = s.fixed;
  if (!s.label.empty()) j["label"] = s.label;
  return j;
}

TxChain chain_from_json(const Json& j, const std::string& path) {
  Reader r(j, path);
  const auto arch = enum_from(r.req<std::string>("architecture"), kArchitectures, architecture_name,
                              r.at("architecture"));
  TxChain chain;
  if (r.has("stages")) {
    if (r.has("params") || r.has("pre") || r.has("post"))
      throw ConfigError(r.at("stages"), "an explicit stage list excludes params, pre and post");
    chain.stages = parse_stage_list(r.raw("stages"), r.at("stages"));
  } else {
    if (arch == Architecture::custom) throw ConfigError(r.at("stages"), "required key is missing");
    chain = parse_params(arch, r.raw("params"), r.at("params"));
    if (r.has("pre")) {
      auto pre = parse_stage_list(r.raw("pre"), r.at("pre"));
      chain.stages.insert(chain.stages.begin(), pre.begin(), pre.end());
    }
    if (r.has("post")) {
      auto post = parse_stage_list(r.raw("post"), r.at("post"));
      chain.stages.insert(chain.stages.end(), post.begin(), post.end());
    }
  }
  chain.architecture = arch;
  r.finish();
  return chain;
}

Json chain_to_json(const TxChain& chain) {
  Json stages = Json::array();
  for (const auto& s : chain.stages) stages.push_back(stage_to_json(s));
  return {{"architecture", architecture_name(chain.architecture)}, {"stages", stages}};
}

Scenario parse_scenario(const Json& j) {
  Reader r(j, "");
  Scenario s;
  s.name = r.req<std::string>("name");
  if (s.name.empty()) throw ConfigError(r.at("name"), "must not be empty");
  s.side = enum_from(r.req<std::string>("side"), kSides, side_name, r.at("side"));
  const bool comm = s.side != Side::qubit;
  const bool qubit = s.side != Side::comm;
  if (comm) s.comm = parse_comm(r.raw("comm"), r.at("comm"));
  else if (r.has("comm")) throw ConfigError(r.at("comm"), "not used by a qubit-only scenario");
  if (qubit) s.qubit = parse_qubit(r.raw("qubit"), r.at("qubit"));
  else if (r.has("qubit")) throw ConfigError(r.at("qubit"), "not used by a comm-only scenario");
  s.chain = chain_from_json(r.raw("chain"), r.at("chain"));

  if (r.has("metrics")) {
    const Json& m = r.raw("metrics");
    if (!m.is_array()) throw ConfigError(r.at("metrics"), "expected an array of names");
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto at = r.at("metrics") + "/" + std::to_string(i);
      const auto name = convert(m[i], at, Tag<std::string>{});
      if (std::find(std::begin(kOutputNames), std::end(kOutputNames), name) == std::end(kOutputNames))
        throw ConfigError(at, "unknown metric '" + name + "'");
      const bool needs_qubit = name == "bloch";
      if (needs_qubit && !qubit) throw ConfigError(at, "needs a qubit side");
      if (!needs_qubit && name != "irr" && name != "onoff" && !comm) throw ConfigError(at, "needs a comm side");
      if (!s.wants(name)) s.metrics.push_back(name);
    }
  }
  if (r.has("analysis")) s.analysis = parse_analysis(r.raw("analysis"), r.at("analysis"));
  if (r.has("calibration")) s.calibration = parse_calibration(r.raw("calibration"), r.at("calibration"));
  if (s.wants("sfdr") && !s.analysis.sfdr_carrier_hz)
    throw ConfigError("/analysis/sfdr_carrier_hz", "required by the sfdr metric");
  r.finish();
  return s;
}

Json scenario_to_json(const Scenario& s) {
  Json j = {{"name", s.name},
            {"side", side_name(s.side)},
            {"chain", chain_to_json(s.chain)},
            {"metrics", s.metrics},
            {"analysis", analysis_to_json(s.analysis)},
            {"calibration", calibration_to_json(s.calibration)}};
  if (s.comm) j["comm"] = comm_to_json(*s.comm);
  if (s.qubit) j["qubit"] = qubit_to_json(*s.qubit);
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_json_file(path)); }

SweepSpec parse_sweep(const Json& j, const std::string& base_dir) {
  Reader r(j, "");
  SweepSpec spec;
  const Json& tmpl = r.raw("scenario");
  if (tmpl.is_string()) {
    std::filesystem::path p = tmpl.get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    spec.base = read_json_file(p.string());
  } else {
    spec.base = tmpl;
  }
  parse_scenario(spec.base);

  const Json& params = r.raw("parameters");
  if (!params.is_array() || params.empty() || params.size() > 2)
    throw ConfigError(r.at("parameters"), "expected one or two swept parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Reader p(params[i], r.at("parameters") + "/" + std::to_string(i));
    SweepAxis axis;
    axis.path = p.req<std::string>("path");
    Json::json_pointer ptr;
    try {
      ptr = Json::json_pointer(axis.path);
    } catch (const Json::exception&) {
      throw ConfigError(p.at("path"), "not a JSON pointer");
    }
    if (!spec.base.contains(ptr)) throw ConfigError(p.at("path"), "path does not exist in the scenario");
    if (p.has("values") == p.has("linspace")) throw ConfigError(p.path(), "give exactly one of values or linspace");
    if (p.has("values")) {
      const Json& v = p.raw("values");
      if (!v.is_array()) throw ConfigError(p.at("values"), "expected an array");
      for (const auto& x : v) axis.values.push_back(x);
    } else {
      const Json& l = p.raw("linspace");
      if (!l.is_array() || l.size() != 3) throw ConfigError(p.at("linspace"), "expected [start, stop, count]");
      const double a = convert(l[0], p.at("linspace") + "/0", Tag<double>{});
      const double b = convert(l[1], p.at("linspace") + "/1", Tag<double>{});
      const int n = convert(l[2], p.at("linspace") + "/2", Tag<int>{});
      if (n < 0) throw ConfigError(p.at("linspace") + "/2", "count must be nonnegative");
      for (int k = 0; k < n; ++k) axis.values.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
    }
    if (axis.values.empty()) throw ConfigError(p.path(), "grid is empty");
    p.finish();
    spec.axes.push_back(std::move(axis));
  }
  if (r.has("columns")) {
    const Json& c = r.raw("columns");
    if (!c.is_array()) throw ConfigError(r.at("columns"), "expected an array of metric names");
    for (std::size_t i = 0; i < c.size(); ++i)
      spec.columns.push_back(convert(c[i], r.at("columns") + "/" + std::to_string(i), Tag<std::string>{}));
  }
  r.finish();
  return spec;
}

}  // namespace unisynth
