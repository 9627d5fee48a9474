#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "unisynth/comm_metrics.hpp"
#include "unisynth/error.hpp"

using namespace unisynth;

namespace {

std::vector<cplx> unit_rms_qam() {
  const auto c = build_constellation(scheme::SquareQam{16});
  std::vector<cplx> s;
  for (int r = 0; r < 4; ++r) s.insert(s.end(), c.points.begin(), c.points.end());
  return s;
}

CommSetup setup_for(ModulationScheme s, std::size_t n = 1024) {
  CommSetup c;
  c.scheme = s;
  c.n_symbols = n;
  return c;
}

TxChain chain_of(std::initializer_list<StageSpec> specs) {
  TxChain c;
  for (const auto& s : specs) c.stages.push_back(make_stage(s));
  return c;
}

// Held NRZ rail: one value per symbol repeated sps times.
std::vector<double> nrz(const std::vector<double>& symbols, std::size_t sps) {
  std::vector<double> r;
  for (double s : symbols) r.insert(r.end(), sps, s);
  return r;
}

std::vector<double> random_levels(std::size_t n, int levels, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, levels - 1);
  std::vector<double> v(n);
  for (auto& x : v) x = pick(rng);
  return v;
}

ComplexEnvelope tones(std::size_t n, double fs, std::initializer_list<std::pair<double, double>> list) {
  std::vector<cplx> x(n);
  for (auto [f, a] : list)
    for (std::size_t k = 0; k < n; ++k) x[k] += std::polar(a, kTwoPi * f * static_cast<double>(k) / fs);
  return {std::move(x), fs};
}

}  // namespace

TEST_CASE("EVM identities") {
  const auto s = unit_rms_qam();
  REQUIRE(std::abs(testutil::rms(s) - 1.0) < 1e-12);
  const auto same = evm(s, s);
  CHECK(same.evm_rms == 0.0);
  CHECK(same.n_symbols == s.size());

  std::vector<cplx> off(s), scaled(s);
  for (auto& v : off) v += 0.05;
  for (auto& v : scaled) v *= 1.02;
  const auto r1 = evm(off, s);
  CHECK(std::abs(r1.evm_rms - 0.05) < 1e-12);
  CHECK(std::abs(r1.evm_db - (-26.0206)) < 1e-4);
  CHECK(std::abs(r1.evm_db - 20.0 * std::log10(r1.evm_rms)) < 1e-12);
  CHECK(std::abs(evm(scaled, s).evm_rms - 0.02) < 1e-12);

  std::vector<cplx> rot(s);
  for (auto& v : rot) v *= std::polar(1.0, 0.03);
  CHECK(std::abs(evm(rot, s).evm_rms - 2.0 * std::sin(0.015)) < 1e-9);

  CHECK_THROWS_AS(evm(std::vector<cplx>(3), s), PreconditionError);
  CHECK_THROWS_AS(evm(std::vector<cplx>(3), std::vector<cplx>(3)), PreconditionError);
  CHECK_THROWS_AS(evm(std::vector<cplx>{}, std::vector<cplx>{}), PreconditionError);
}

TEST_CASE("demodulation loopback makes no errors") {
  const auto r = run_comm(TxChain{}, setup_for(scheme::MPsk{4}));
  CHECK(r.symbol_errors == 0);
  CHECK(r.demod.decisions.size() == r.demod.soft.size());
}

TEST_CASE("gross amplitude error on 16-QAM causes ring confusions") {
  const auto r = run_comm(chain_of({stage::AmplitudeError{0.2}}), setup_for(scheme::SquareQam{16}));
  CHECK(r.symbol_errors > 0);
}

TEST_CASE("demodulation of a record too short for the guard trim fails") {
  const auto c = build_constellation(scheme::MPsk{4});
  PulseShape p;
  const ComplexEnvelope tiny(std::vector<cplx>(p.tap_count() + 4 * 32), 32e9);
  CHECK_THROWS_AS(demodulate(tiny, c, p), PreconditionError);
}

TEST_CASE("EVM budget") {
  const auto setup = setup_for(scheme::SquareQam{16});

  const auto single = evm_budget(chain_of({stage::AmplitudeError{0.02}}), setup);
  CHECK(std::abs(single.terms.at("amp") - single.total_measured) < 1e-9);

  const auto joint = evm_budget(chain_of({stage::AmplitudeError{0.02}, stage::StaticPhase{0.02}}), setup);
  const double law = std::sqrt(0.02 * 0.02 + std::pow(2.0 * std::sin(0.01), 2));
  CHECK(std::abs(joint.total_measured - law) / law < 0.10);
  double rss = 0.0;
  for (const auto& [name, v] : joint.terms) rss += v * v;
  CHECK(std::abs(joint.total_predicted - std::sqrt(rss)) < 1e-12);
  CHECK(joint.terms.size() == 5);

  const auto none = evm_budget(TxChain{}, setup);
  for (const auto& [name, v] : none.terms) CHECK(v == 0.0);

  TxChain untagged = chain_of({stage::AmplitudeError{0.02}});
  untagged.stages[0].tag.reset();
  CHECK_THROWS_AS(evm_budget(untagged, setup), PreconditionError);
}

TEST_CASE("EVM budget additivity for small terms") {
  const auto setup = setup_for(scheme::SquareQam{16});
  const auto b = evm_budget(chain_of({stage::AmplitudeError{0.02}, stage::StaticPhase{0.02},
                                      stage::LoFeedthrough{{0.02, 0.0}}, stage::BandwidthLimit{5e9}}),
                            setup);
  for (const auto& [name, v] : b.terms) CHECK(v < 0.05);
  CHECK(std::abs(b.total_predicted - b.total_measured) / b.total_measured < 0.10);
}

TEST_CASE("eye of ideal NRZ is fully open") {
  const std::size_t sps = 16;
  const auto sym = random_levels(200, 2, 3);
  std::vector<double> pm(sym.size());
  for (std::size_t k = 0; k < sym.size(); ++k) pm[k] = 2.0 * sym[k] - 1.0;
  const auto eye = eye_metrics(nrz(pm, sps), sps, 2, 0, pm.size());
  CHECK(std::abs(eye.eye_height - 2.0) < 1e-12);
  CHECK(eye.eye_width == doctest::Approx(1.0));
  CHECK(eye.eye_width <= 1.0);
  CHECK_THROWS_AS(eye_metrics(nrz(pm, sps), sps, 2, 0, 31), PreconditionError);
}

TEST_CASE("eye closes monotonically with bandwidth") {
  const std::size_t sps = 32;
  const double fs = 32e9, ts = 1e-9;
  const auto sym = random_levels(400, 2, 5);
  std::vector<cplx> x;
  for (double s : sym) x.insert(x.end(), sps, cplx(2.0 * s - 1.0, 0.0));
  const ComplexEnvelope env(x, fs);
  double previous = 2.0;
  for (double frac : {3.0, 1.5, 1.0, 0.7, 0.5, 0.35, 0.25}) {
    const auto y = bandwidth_limit(env, frac / ts);
    const auto eye = eye_metrics(y.real_part(), sps, 2, 16 * sps, 360);
    CAPTURE(frac);
    CHECK(eye.eye_width <= previous);
    CHECK(eye.eye_width >= 0.0);
    if (frac == 0.35) CHECK(eye.eye_width < 1.0);
    previous = eye.eye_width;
  }
}

TEST_CASE("eye levels reflect unequal state gains") {
  const std::size_t sps = 16;
  const auto sym = random_levels(300, 3, 9);
  const double gains[] = {1.0, 1.1, 0.9};
  std::vector<double> rail;
  for (double s : sym) rail.push_back(s * gains[static_cast<int>(s)]);
  const auto eye = eye_metrics(nrz(rail, sps), sps, 3, 0, rail.size());
  REQUIRE(eye.levels.size() == 3);
  CHECK(std::abs(eye.levels[0].mean - 0.0) < 1e-12);
  CHECK(std::abs(eye.levels[1].mean - 1.1) < 1e-12);
  CHECK(std::abs(eye.levels[2].mean - 1.8) < 1e-12);
  CHECK(std::abs(eye.spacing_nonuniformity - (1.1 - 0.7) / 0.9) < 1e-9);
}

TEST_CASE("Welch PSD of a tone") {
  const double fs = 1e9;
  const std::size_t n = 16384, seg = 1024;
  const double f = 100.0 * fs / static_cast<double>(seg);
  const auto sp = psd_welch(testutil::tone(n, f, fs), seg, 0.5);
  std::size_t peak = 0;
  double total = 0.0;
  for (std::size_t k = 0; k < sp.psd.size(); ++k) {
    if (sp.psd[k] > sp.psd[peak]) peak = k;
    total += sp.psd[k] * sp.resolution_bw;
    CHECK(sp.psd[k] >= 0.0);
    if (k) CHECK(sp.freqs[k] > sp.freqs[k - 1]);
  }
  CHECK(std::abs(sp.freqs[peak] - f) < 1e-6);
  CHECK(std::abs(total - 1.0) < 0.05);
}

TEST_CASE("Welch PSD of white noise is flat") {
  const double fs = 1e9;
  const std::size_t seg = 256;
  const auto x = testutil::random_envelope(seg * 65 / 2, 17, fs);
  const auto sp = psd_welch(x, seg, 0.5);
  const double level = 2.0 / fs;  // variance of the complex noise per Hz
  for (double p : sp.psd) CHECK(std::abs(10.0 * std::log10(p / level)) < 2.0);
}

TEST_CASE("Welch PSD edge cases") {
  const ComplexEnvelope z(std::vector<cplx>(4096), 1e9);
  for (double p : psd_welch(z, 256, 0.5).psd) CHECK(p == 0.0);
  CHECK_THROWS_AS(psd_welch(z, 8192, 0.5), PreconditionError);
  CHECK_THROWS_AS(psd_welch(z, 256, 1.0), PreconditionError);
  CHECK_THROWS_AS(psd_welch(z, 4, 0.5), PreconditionError);
}

TEST_CASE("SFDR from injected spurs") {
  const double fs = 1e9;
  const std::size_t n = 16384, seg = 1024;
  const double bin = fs / static_cast<double>(seg);
  const auto one = psd_welch(tones(n, fs, {{100 * bin, 1.0}, {300 * bin, std::pow(10.0, -45.0 / 20)}}), seg, 0.5);
  const auto r = spurs_sfdr(one, 100 * bin, -fs / 2, fs / 2);
  CHECK(std::abs(r.sfdr_db - 45.0) < 0.5);
  REQUIRE_FALSE(r.spurs.empty());
  CHECK(std::abs(r.spurs[0].freq_hz - 300 * bin) < 1e-6);

  const auto pure = psd_welch(tones(n, fs, {{100 * bin, 1.0}}), seg, 0.5);
  CHECK(spurs_sfdr(pure, 100 * bin, -fs / 2, fs / 2).sfdr_db > 100.0);

  const auto two = psd_welch(tones(n, fs, {{100 * bin, 1.0},
                                           {-200 * bin, std::pow(10.0, -40.0 / 20)},
                                           {250 * bin, std::pow(10.0, -50.0 / 20)}}),
                             seg, 0.5);
  const auto r2 = spurs_sfdr(two, 100 * bin, -fs / 2, fs / 2);
  CHECK(std::abs(r2.sfdr_db - 40.0) < 0.5);
  for (std::size_t k = 1; k < r2.spurs.size(); ++k) CHECK(r2.spurs[k].level_dbc <= r2.spurs[k - 1].level_dbc);

  const auto big = psd_welch(tones(n, fs, {{100 * bin, 3.0}, {300 * bin, 3.0 * std::pow(10.0, -45.0 / 20)}}), seg, 0.5);
  CHECK(std::abs(spurs_sfdr(big, 100 * bin, -fs / 2, fs / 2).sfdr_db - r.sfdr_db) < 1e-9);

  const ComplexEnvelope z(std::vector<cplx>(n), fs);
  CHECK_THROWS_AS(spurs_sfdr(psd_welch(z, seg, 0.5), 100 * bin, -fs / 2, fs / 2), PreconditionError);
}

TEST_CASE("image rejection") {
  const double fs = 32e9;
  const auto ideal = image_rejection(TxChain{}, 1e9, fs);
  CHECK(ideal.irr_db > 100.0);
  CHECK(ideal.lo_rejection_db > 100.0);

  const auto iq = image_rejection(chain_of({stage::IqImbalance{0.02, 0.0}}), 1e9, fs);
  const auto c = iq_imbalance_coefficients(0.02, 0.0);
  CHECK(std::abs(iq.irr_db - 10.0 * std::log10(std::norm(c.mu / c.nu))) < 0.1);

  const auto lo = image_rejection(chain_of({stage::LoFeedthrough{{0.01, 0.0}}}), 1e9, fs);
  CHECK(std::abs(lo.lo_rejection_db - 40.0) < 0.1);

  CHECK_THROWS_AS(image_rejection(TxChain{}, 0.0, fs), PreconditionError);
}

TEST_CASE("LMS equalizer on an identity channel") {
  const auto c = build_constellation(scheme::MPsk{4});
  const auto ref = random_symbols(c, 2000, 4);
  const auto taps = lms_equalizer_train(ref, ref, 7, 0.01);
  REQUIRE(taps.size() == 7);
  for (std::size_t k = 0; k < taps.size(); ++k)
    CHECK(std::abs(taps[k] - (k == 3 ? cplx(1, 0) : cplx(0, 0))) < 0.01);
}

TEST_CASE("LMS equalizer recovers mild ISI") {
  auto setup = setup_for(scheme::SquareQam{16}, 2048);
  const auto chain = chain_of({stage::BandwidthLimit{0.7 * setup.symbol_rate}});
  const double before = run_comm(chain, setup).evm.evm_rms;
  setup.equalizer_taps = 7;
  const double after = run_comm(chain, setup).evm.evm_rms;
  CHECK(20.0 * std::log10(before / after) > 3.0);
}

TEST_CASE("LMS equalizer divergence and preconditions") {
  const auto c = build_constellation(scheme::SquareQam{16});
  const auto ref = random_symbols(c, 1000, 6);
  std::vector<cplx> rx(ref);
  for (auto& v : rx) v *= 0.9;
  CHECK_THROWS_AS(lms_equalizer_train(rx, ref, 7, 10.0), Error);
  CHECK_THROWS_AS(lms_equalizer_train(ref, ref, 6, 0.01), PreconditionError);
  CHECK_THROWS_AS(lms_equalizer_train(ref, ref, 17, 0.01), PreconditionError);
}
