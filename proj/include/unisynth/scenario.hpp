#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "unisynth/calibration.hpp"
#include "unisynth/chain.hpp"
#include "unisynth/comm_metrics.hpp"
#include "unisynth/qubit.hpp"

namespace unisynth {

using Json = nlohmann::json;

enum class Side { comm, qubit, both };

struct QubitScenario {
  QubitModel model;
  GateSpec gate;
  GateEnvelopeSpec envelope;  // peak is derived from the gate angle
  int samples_per_gate = 1024;

  double sample_rate() const { return samples_per_gate / gate.duration; }
};

struct AnalysisSpec {
  std::size_t psd_segment = 1024;
  double psd_overlap = 0.5;
  std::optional<double> irr_test_hz;
  std::optional<double> sfdr_carrier_hz;
  double sfdr_band_lo_hz = 0.0;
  double sfdr_band_hi_hz = 0.0;
};

struct CalibrationSpec {
  // rabi
  std::optional<double> rabi_max_code;  // default: twice the nominal pi peak
  int rabi_points = 121;
  double rabi_max_residual_rad = 0.25;
  // iq
  std::optional<double> iq_test_hz;  // default: probe sample rate / 16
  double iq_amplitude = 0.5;
  std::size_t iq_n = 4096;
  // polar_delay
  double polar_resolution = 50e-12;
  double polar_range = 400e-12;
  // dpd
  double dpd_max_amplitude = 1.0;
  int dpd_points = 24;
  int dpd_order = 5;
  // leakage
  std::vector<double> leakage_bursts{1.0};
  std::size_t leakage_on = 256;
  std::size_t leakage_off = 256;
};

inline constexpr const char* kOutputNames[] = {"constellation", "eye", "psd", "budget",
                                                "irr", "sfdr", "onoff", "bloch",
                                                "alphabet"};

struct Scenario {
  std::string name;
  Side side = Side::comm;
  std::optional<CommSetup> comm;
  std::optional<QubitScenario> qubit;
  TxChain chain;
  std::vector<std::string> metrics;  // extra outputs from kOutputNames
  AnalysisSpec analysis;
  CalibrationSpec calibration;

  bool wants(const std::string& metric) const;
};

// Parsing and validation. Throws ConfigError naming the offending key as a
// JSON pointer.
Scenario parse_scenario(const Json& j);
Scenario load_scenario(const std::string& path);
Json scenario_to_json(const Scenario& s);

Json stage_to_json(const Stage& s);
Stage stage_from_json(const Json& j, const std::string& path);
Json chain_to_json(const TxChain& chain);
TxChain chain_from_json(const Json& j, const std::string& path);

// Reads a whole file and parses it as JSON; ConfigError on failure.
Json read_json_file(const std::string& path);

// Deterministic JSON text: sorted keys, doubles at 17 significant digits,
// non-finite numbers as null, two-space indent, trailing newline.
std::string dump_json(const Json& j);
std::string format_double(double v);

// Output files keyed by file name.
using FileSet = std::map<std::string, std::string>;

struct SimulationResult {
  Json metrics;
  FileSet files;  // CSVs; metrics.json is added by the writer
  std::vector<std::string> warnings;
};

SimulationResult simulate(const Scenario& s, int threads = 1);

struct SweepAxis {
  std::string path;  // JSON pointer into the scenario
  std::vector<Json> values;
};

struct SweepSpec {
  Json base;  // scenario template
  std::vector<SweepAxis> axes;
  std::vector<std::string> columns;  // metric paths ("comm.evm_db"); empty selects all
};

SweepSpec parse_sweep(const Json& j, const std::string& base_dir);
// One CSV row per grid point, first axis outermost. Failed points are marked FAILED.
std::string run_sweep(const SweepSpec& spec, int threads = 1);

inline constexpr const char* kProcedureNames[] = {"rabi", "iq", "polar_delay", "dpd", "leakage"};

struct CalibrationOutcome {
  std::string procedure;
  Json correction;
  Json before;
  Json after;
  bool reverted = false;  // correction withheld because it did not help
  Scenario calibrated;
};

CalibrationOutcome calibrate(const Scenario& s, const std::string& procedure, int threads = 1);

// Writes every file atomically (temp file + rename) into dir, creating it.
void write_outputs(const std::string& dir, const FileSet& files);

}  // namespace unisynth
