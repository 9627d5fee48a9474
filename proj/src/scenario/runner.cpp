#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "unisynth/error.hpp"
#include "unisynth/parallel.hpp"
#include "unisynth/protocols.hpp"
#include "unisynth/scenario.hpp"

namespace unisynth {

namespace {

constexpr double kPsdFloor = 1e-300;
constexpr std::size_t kEyeTraces = 256;
// JSON has no infinity; a perfect link reports this floor instead.
constexpr double kEvmDbFloor = -300.0;

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? a : a + (b - a) * k / (n - 1);
  return v;
}

double comm_rate(const Scenario& s) { return s.comm->sample_rate(); }

// Rate for tone probes: the comm sample rate when there is a comm side.
double probe_rate(const Scenario& s) { return s.comm ? comm_rate(s) : s.qubit->sample_rate(); }

std::size_t distinct_in_phase_levels(const Constellation& c) {
  std::vector<double> levels;
  for (auto p : c.points) levels.push_back(p.real());
  std::sort(levels.begin(), levels.end());
  std::size_t n = 0;
  for (std::size_t k = 0; k < levels.size(); ++k)
    if (k == 0 || levels[k] - levels[k - 1] > 1e-9) ++n;
  return n;
}

std::string label_text(const Constellation& c, cplx symbol) {
  const auto idx = c.nearest(symbol);
  if (c.bits_per_symbol == 0) return std::to_string(idx);
  std::string s;
  for (auto b : label_bits(c.labels[idx], c.bits_per_symbol)) s += b ? '1' : '0';
  return s;
}

Json evm_json(const CommRun& run) {
  return {{"evm_rms", run.evm.evm_rms},
          {"evm_db", std::max(run.evm.evm_db, kEvmDbFloor)},
          {"n_symbols", run.evm.n_symbols},
          {"reference_rms", run.evm.reference_rms},
          {"symbol_errors", run.symbol_errors},
          {"timing_offset", run.demod.timing_offset},
          {"equalizer_taps", run.equalizer.size()}};
}

Json fidelity_json(const FidelityReport& f, const GateSpec& gate) {
  return {{"f_avg", f.f_avg},
          {"infidelity", f.infidelity},
          {"eps_a", f.eps_a},
          {"eps_phi", f.eps_phi},
          {"leakage_pop", f.leakage_pop},
          {"theta_actual", f.theta_actual},
          {"axis_actual", f.axis_actual},
          {"predicted_infidelity", infidelity_model(gate.theta, f.eps_a, f.eps_phi)}};
}

Json irr_json(const ImageRejectionReport& r) {
  return {{"irr_db", r.irr_db}, {"lo_rejection_db", r.lo_rejection_db}};
}

double default_iq_test(const Scenario& s) { return probe_rate(s) / 16.0; }

ImageRejectionReport measure_irr(const Scenario& s, const TxChain& chain, double f_test) {
  return image_rejection(chain, f_test, probe_rate(s), s.calibration.iq_n, s.calibration.iq_amplitude);
}

ComplexEnvelope leakage_probe(const Scenario& s) {
  return pulsed_carrier_probe(probe_rate(s), s.calibration.leakage_bursts, s.calibration.leakage_on,
                              s.calibration.leakage_off);
}

std::string scatter_csv(const CommRun& run) {
  std::ostringstream o;
  o << "bits,i_ref,q_ref,i_rx,q_rx\n";
  for (std::size_t k = 0; k < run.demod.soft.size(); ++k) {
    const cplx ref = run.reference_trimmed[k];
    const cplx rx = run.demod.soft[k];
    o << label_text(run.constellation, ref) << ',' << csv_number(ref.real()) << ',' << csv_number(ref.imag())
      << ',' << csv_number(rx.real()) << ',' << csv_number(rx.imag()) << '\n';
  }
  return o.str();
}

// Traces one symbol long with the nominal decision instant at t_frac = 0.5.
std::string eye_csv(const CommRun& run, const PulseShape& shape) {
  const auto sps = static_cast<std::size_t>(shape.samples_per_symbol);
  const std::size_t guard = shape.guard_symbols();
  const std::size_t n_sym = symbols_in_record(run.tx.size(), shape);
  std::ostringstream o;
  o << "t_frac,i,q\n";
  if (n_sym <= 2 * guard + 1) return o.str();
  const long first = static_cast<long>(guard * sps + shape.delay_samples()) - static_cast<long>(sps / 2) +
                     run.demod.timing_offset;
  const std::size_t traces = std::min(kEyeTraces, n_sym - 2 * guard - 1);
  for (std::size_t n = 0; n < traces; ++n) {
    for (std::size_t p = 0; p < sps; ++p) {
      const long k = first + static_cast<long>(n * sps + p);
      if (k < 0 || static_cast<std::size_t>(k) >= run.tx.size()) continue;
      const cplx v = run.tx[static_cast<std::size_t>(k)];
      o << csv_number(static_cast<double>(p) / static_cast<double>(sps)) << ',' << csv_number(v.real()) << ','
        << csv_number(v.imag()) << '\n';
    }
  }
  return o.str();
}

std::size_t segment_for(std::size_t wanted, std::size_t available) {
  std::size_t seg = wanted;
  while (seg > available && seg > 16) seg /= 2;
  return std::min(seg, available);
}

std::string psd_csv(const Spectrum& spec) {
  std::ostringstream o;
  o << "freq_hz,db\n";
  for (std::size_t k = 0; k < spec.freqs.size(); ++k)
    o << csv_number(spec.freqs[k]) << ',' << csv_number(10.0 * std::log10(std::max(spec.psd[k], kPsdFloor))) << '\n';
  return o.str();
}

Json sfdr_json(const Scenario& s, const TxChain& chain) {
  const double fs = probe_rate(s);
  const double fc = *s.analysis.sfdr_carrier_hz;
  const std::size_t seg = s.analysis.psd_segment;
  const std::size_t n = seg * 8;
  std::vector<cplx> tone(n);
  for (std::size_t k = 0; k < n; ++k) tone[k] = std::polar(1.0, kTwoPi * fc * static_cast<double>(k) / fs);
  const auto out = run_chain(chain, ComplexEnvelope(std::move(tone), fs));
  const auto spec = psd_welch(out, seg, s.analysis.psd_overlap);
  double lo = s.analysis.sfdr_band_lo_hz, hi = s.analysis.sfdr_band_hi_hz;
  if (lo == 0.0 && hi == 0.0) {
    lo = -fs / 2;
    hi = fs / 2;
  }
  const auto r = spurs_sfdr(spec, fc, lo, hi);
  Json spurs = Json::array();
  for (const auto& e : r.spurs) spurs.push_back({{"freq_hz", e.freq_hz}, {"level_dbc", e.level_dbc}});
  return {{"sfdr_db", r.sfdr_db}, {"carrier_hz", r.carrier_hz}, {"spurs", spurs}};
}

double max_drive_amplitude(const Scenario& s, const std::optional<CommRun>& run) {
  double m = 0.0;
  if (run) {
    ComplexEnvelope in = *shape_symbols(SymbolStream{run->reference, 1.0 / s.comm->symbol_rate}, s.comm->shape);
    m = std::max(m, in.peak_amplitude());
  }
  if (s.qubit) m = std::max(m, s.qubit->envelope.peak_amplitude);
  return m;
}

// Flattens numeric and boolean leaves into dotted keys; arrays are skipped.
void flatten(const Json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  for (const auto& item : j.items()) {
    const std::string key = prefix.empty() ? item.key() : prefix + "." + item.key();
    const Json& v = item.value();
    if (v.is_object()) flatten(v, key, out);
    else if (v.is_number_float()) out[key] = csv_number(v.get<double>());
    else if (v.is_number_integer()) out[key] = std::to_string(v.get<long long>());
    else if (v.is_number_unsigned()) out[key] = std::to_string(v.get<unsigned long long>());
    else if (v.is_boolean()) out[key] = v.get<bool>() ? "true" : "false";
  }
}

std::string csv_cell(const Json& v) {
  if (v.is_number_float()) return csv_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

SimulationResult simulate(const Scenario& s, int threads) {
  (void)threads;
  SimulationResult r;
  r.metrics = {{"scenario", s.name}};
  std::optional<CommRun> run;

  if (s.comm) {
    const CommSetup& setup = *s.comm;
    run = run_comm(s.chain, setup);
    Json comm = evm_json(*run);
    if (s.wants("constellation")) r.files["constellation.csv"] = scatter_csv(*run);
    if (s.wants("alphabet")) r.files["alphabet.csv"] = constellation_csv(run->constellation);
    if (s.wants("eye")) {
      r.files["eye.csv"] = eye_csv(*run, setup.shape);
      const auto eye = eye_metrics(run->tx, 1.0 / setup.symbol_rate, distinct_in_phase_levels(run->constellation),
                                   setup.shape);
      comm["eye"] = {{"eye_height", eye.eye_height},
                     {"eye_width", eye.eye_width},
                     {"spacing_nonuniformity", eye.spacing_nonuniformity},
                     {"max_level_spread", eye.max_level_spread}};
    }
    if (s.wants("psd")) {
      const auto seg = segment_for(s.analysis.psd_segment, run->tx.size());
      r.files["psd.csv"] = psd_csv(psd_welch(run->tx, seg, s.analysis.psd_overlap));
    }
    if (s.wants("budget")) {
      const auto b = evm_budget(s.chain, setup);
      Json terms = Json::object();
      std::ostringstream o;
      o << "term,evm\n";
      for (const auto& [name, v] : b.terms) {
        terms[name] = v;
        o << name << ',' << csv_number(v) << '\n';
      }
      o << "total_predicted," << csv_number(b.total_predicted) << '\n';
      o << "total_measured," << csv_number(b.total_measured) << '\n';
      r.files["budget.csv"] = o.str();
      comm["budget"] = {{"terms", terms}, {"total_predicted", b.total_predicted}, {"total_measured", b.total_measured}};
    }
    if (s.wants("sfdr")) comm["sfdr"] = sfdr_json(s, s.chain);
    r.metrics["comm"] = comm;
  }

  if (s.qubit) {
    const auto& q = *s.qubit;
    const auto drive = synth_qubit_pulse(s.chain, q.gate, q.envelope, q.model, q.sample_rate());
    r.metrics["qubit"] = fidelity_json(average_gate_fidelity(propagate(q.model, drive), q.gate), q.gate);
    if (s.wants("bloch")) {
      std::ostringstream o;
      o << "t,x,y,z\n";
      for (const auto& p : bloch_trajectory(q.model, drive))
        o << csv_number(p.t) << ',' << csv_number(p.x) << ',' << csv_number(p.y) << ',' << csv_number(p.z) << '\n';
      r.files["bloch.csv"] = o.str();
    }
  }

  if (s.wants("irr"))
    r.metrics["irr"] = irr_json(measure_irr(s, s.chain, s.analysis.irr_test_hz.value_or(default_iq_test(s))));
  if (s.wants("onoff")) r.metrics["onoff_ratio_db"] = onoff_ratio_db(s.chain, leakage_probe(s));

  r.warnings = chain_warnings(s.chain, max_drive_amplitude(s, run));
  r.metrics["warnings"] = r.warnings;
  return r;
}

std::string run_sweep(const SweepSpec& spec, int threads) {
  struct Point {
    std::vector<Json> values;
    std::map<std::string, std::string> metrics;
    bool ok = false;
  };
  std::vector<Point> points;
  if (spec.axes.size() == 1) {
    for (const auto& v : spec.axes[0].values) points.push_back({{v}, {}, false});
  } else {
    for (const auto& a : spec.axes[0].values)
      for (const auto& b : spec.axes[1].values) points.push_back({{a, b}, {}, false});
  }

  parallel_for(points.size(), threads, [&](std::size_t i) {
    Json j = spec.base;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) j[Json::json_pointer(spec.axes[a].path)] = points[i].values[a];
    try {
      const auto result = simulate(parse_scenario(j), 1);
      flatten(result.metrics, "", points[i].metrics);
      points[i].ok = true;
    } catch (const std::exception&) {
      points[i].ok = false;
    }
  });

  std::vector<std::string> columns = spec.columns;
  if (columns.empty()) {
    std::set<std::string> all;
    for (const auto& p : points)
      for (const auto& [k, v] : p.metrics) all.insert(k);
    columns.assign(all.begin(), all.end());
  }

  std::ostringstream o;
  for (const auto& a : spec.axes) o << a.path << ',';
  o << "status";
  for (const auto& c : columns) o << ',' << c;
  o << '\n';
  for (const auto& p : points) {
    for (const auto& v : p.values) o << csv_cell(v) << ',';
    o << (p.ok ? "ok" : "FAILED");
    for (const auto& c : columns) {
      o << ',';
      if (auto it = p.metrics.find(c); it != p.metrics.end()) o << it->second;
    }
    o << '\n';
  }
  return o.str();
}

CalibrationOutcome calibrate(const Scenario& s, const std::string& procedure, int threads) {
  CalibrationOutcome out;
  out.procedure = procedure;
  out.calibrated = s;
  TxChain corrected;
  bool improved = true;

  const auto need_comm = [&] {
    if (!s.comm) throw ConfigError("/side", "procedure '" + procedure + "' needs a comm side");
  };

  if (procedure == "rabi") {
    if (!s.qubit) throw ConfigError("/side", "procedure 'rabi' needs a qubit side");
    const auto& q = *s.qubit;
    RabiCalOptions opts;
    opts.probe = q.envelope;
    opts.sample_rate = q.sample_rate();
    opts.max_residual_rad = s.calibration.rabi_max_residual_rad;
    opts.threads = threads;
    const double max_code = s.calibration.rabi_max_code.value_or(2.0 * q.envelope.peak_amplitude);
    const auto codes = linspace(0.0, max_code, s.calibration.rabi_points);
    const auto before = gate_fidelity(q.model, s.chain, q.gate, q.envelope, q.sample_rate());
    const auto lut = rabi_amplitude_cal(q.model, s.chain, codes, opts);
    corrected = apply_rabi_lut(s.chain, lut);
    const auto after = gate_fidelity(q.model, corrected, q.gate, q.envelope, q.sample_rate());
    out.before = fidelity_json(before, q.gate);
    out.after = fidelity_json(after, q.gate);
    out.correction = {{"stage", stage_to_json(corrected.stages.front())},
                      {"fit_residual_rad", lut.fit_residual_rad},
                      {"codes", lut.codes},
                      {"effective", lut.effective}};
    improved = after.infidelity <= before.infidelity;
  } else if (procedure == "iq") {
    const double f = s.calibration.iq_test_hz.value_or(default_iq_test(s));
    const auto before = measure_irr(s, s.chain, f);
    const auto cal = iq_cal(s.chain, f, probe_rate(s), s.calibration.iq_n, s.calibration.iq_amplitude);
    corrected = apply_iq_correction(s.chain, cal.correction);
    const auto after = measure_irr(s, corrected, f);
    out.before = irr_json(before);
    out.after = irr_json(after);
    out.correction = {{"stage", stage_to_json(corrected.stages.front())},
                      {"mu", Json::array({cal.mu.real(), cal.mu.imag()})},
                      {"nu", Json::array({cal.nu.real(), cal.nu.imag()})},
                      {"offset", Json::array({cal.offset.real(), cal.offset.imag()})}};
    improved = after.irr_db >= before.irr_db && after.lo_rejection_db >= before.lo_rejection_db;
  } else if (procedure == "polar_delay") {
    need_comm();
    const auto before = run_comm(s.chain, *s.comm);
    const auto r = polar_delay_align(s.chain, s.calibration.polar_resolution, s.calibration.polar_range, *s.comm,
                                     threads);
    corrected = apply_polar_alignment(s.chain, r.best_advance);
    const auto after = run_comm(corrected, *s.comm);
    out.before = evm_json(before);
    out.after = evm_json(after);
    out.correction = {{"phase_advance", r.best_advance}, {"grid", r.grid}, {"evm", r.evm}};
    improved = after.evm.evm_rms <= before.evm.evm_rms;
  } else if (procedure == "dpd") {
    need_comm();
    const double top = s.calibration.dpd_max_amplitude;
    const int n = s.calibration.dpd_points;
    const auto grid = linspace(top / n, top, n);
    const auto before = run_comm(s.chain, *s.comm);
    const auto dpd = dpd_fit(s.chain, grid, s.calibration.dpd_order, comm_rate(s));
    corrected = apply_dpd(s.chain, dpd);
    const auto after = run_comm(corrected, *s.comm);
    out.before = evm_json(before);
    out.after = evm_json(after);
    out.correction = {{"stage", stage_to_json(corrected.stages.front())},
                      {"small_signal_gain", dpd.small_signal_gain},
                      {"small_signal_phase", dpd.small_signal_phase}};
    improved = after.evm.evm_rms <= before.evm.evm_rms;
  } else if (procedure == "leakage") {
    const auto probe = leakage_probe(s);
    const double before = onoff_ratio_db(s.chain, probe);
    const cplx cancel = leakage_cancel(s.chain, probe);
    corrected = apply_leakage_cancel(s.chain, cancel);
    const double after = onoff_ratio_db(corrected, probe);
    out.before = {{"onoff_ratio_db", before}};
    out.after = {{"onoff_ratio_db", after}};
    out.correction = {{"cancel", Json::array({cancel.real(), cancel.imag()})}};
    improved = after >= before;
  } else {
    throw ConfigError("--procedure", "unknown procedure '" + procedure + "'");
  }

  if (improved) {
    out.calibrated.chain = corrected;
  } else {
    out.reverted = true;
    out.after = out.before;
  }
  return out;
}

}  // namespace unisynth
