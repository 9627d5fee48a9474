#include <cmath>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "unisynth/envelope.hpp"
#include "unisynth/error.hpp"

using namespace unisynth;

TEST_CASE("make_envelope builds samples from rails") {
  const std::vector<double> i{1, 0}, q{0, 1};
  const auto env = make_envelope(i, q, 1.0);
  REQUIRE(env.size() == 2);
  CHECK(env[0] == cplx(1, 0));
  CHECK(env[1] == cplx(0, 1));

  const std::vector<double> z(3, 0.0);
  const auto zero = make_envelope(z, z, 1.0);
  for (auto v : zero.samples()) CHECK(v == cplx(0, 0));

  const std::vector<double> i3{3}, q4{4};
  CHECK(std::abs(make_envelope(i3, q4, 1.0)[0]) == doctest::Approx(5.0));
}

TEST_CASE("make_envelope rejects bad input") {
  const std::vector<double> a{1, 2}, b{1};
  CHECK_THROWS_AS(make_envelope(a, b, 1.0), PreconditionError);
  CHECK_THROWS_AS(make_envelope(a, a, 0.0), PreconditionError);
  CHECK_THROWS_AS(make_envelope(a, a, -1.0), PreconditionError);
  const std::vector<double> empty;
  CHECK_THROWS_AS(make_envelope(empty, empty, 1.0), PreconditionError);
}

TEST_CASE("to_polar single samples") {
  CHECK(to_polar({{cplx(1, 0)}, 1.0}).phase[0] == 0.0);
  const auto j = to_polar({{cplx(0, 1)}, 1.0});
  CHECK(j.amplitude[0] == doctest::Approx(1.0));
  CHECK(j.phase[0] == doctest::Approx(kPi / 2));
  const auto p = to_polar({{cplx(3, 4)}, 1.0});
  CHECK(p.amplitude[0] == doctest::Approx(5.0));
  CHECK(p.phase[0] == doctest::Approx(std::atan2(4.0, 3.0)));
}

TEST_CASE("from_polar single samples") {
  CHECK(from_polar({{2.0}, {0.0}, 1.0, 0.0})[0] == cplx(2, 0));
  const auto m = from_polar({{1.0}, {kPi}, 1.0, 0.0})[0];
  CHECK(std::abs(m - cplx(-1, 0)) < 1e-15);
  CHECK(from_polar({{0.0}, {1.234}, 1.0, 0.0})[0] == cplx(0, 0));
  CHECK_THROWS_AS(from_polar({{-1.0}, {0.0}, 1.0, 0.0}), PreconditionError);
}

TEST_CASE("polar round trip and continuity") {
  const auto x = testutil::random_envelope(4096, 7);
  const auto tracks = to_polar(x);
  const auto y = from_polar(tracks);
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK(tracks.amplitude[k] >= 0.0);
    if (std::abs(x[k]) > 1e-9) CHECK(std::abs(y[k] - x[k]) < 1e-12);
    if (k > 0) CHECK(std::abs(tracks.phase[k] - tracks.phase[k - 1]) <= kPi + 1e-12);
  }
}

TEST_CASE("phase holds through zero amplitude") {
  const ComplexEnvelope x({cplx(0, 0), cplx(0, 1), cplx(0, 0), cplx(0, 0), cplx(-1, 0)}, 1.0);
  const auto t = to_polar(x);
  CHECK(t.phase[0] == 0.0);
  CHECK(t.phase[2] == doctest::Approx(kPi / 2));
  CHECK(t.phase[3] == doctest::Approx(kPi / 2));
  CHECK(t.phase[4] == doctest::Approx(kPi));
}

TEST_CASE("fractional_delay identity and integer shift") {
  const auto x = testutil::random_envelope(256, 3, 1e9);
  CHECK(fractional_delay(x, 0.0) == x);
  const auto y = fractional_delay(x, 3.0 / 1e9);
  for (std::size_t k = 3; k < x.size(); ++k) CHECK(y[k] == x[k - 3]);
  for (std::size_t k = 0; k < 3; ++k) CHECK(y[k] == cplx(0, 0));
}

TEST_CASE("fractional_delay of a tone is a phase rotation") {
  const double fs = 1.0;
  for (double f : {0.01, 0.05, 0.095}) {
    for (double tau : {0.3, 1.7, -2.45}) {
      const auto x = testutil::tone(512, f, fs);
      const auto y = fractional_delay(x, tau);
      const cplx rot = std::polar(1.0, -kTwoPi * f * tau);
      double err = 0.0;
      for (std::size_t k = kInterpolationGuard + 3; k + kInterpolationGuard + 3 < x.size(); ++k)
        err = std::max(err, std::abs(y[k] - x[k] * rot));
      CHECK(err < 1e-3);
    }
  }
}

TEST_CASE("fractional_delay is linear") {
  const auto x = testutil::random_envelope(300, 11);
  const auto y = testutil::random_envelope(300, 12);
  const cplx a(0.7, -0.2), b(-1.3, 0.4);
  std::vector<cplx> mix(300);
  for (std::size_t k = 0; k < 300; ++k) mix[k] = a * x[k] + b * y[k];
  const double tau = 0.37;
  const auto lhs = fractional_delay(ComplexEnvelope(mix, 1.0), tau);
  const auto dx = fractional_delay(x, tau), dy = fractional_delay(y, tau);
  for (std::size_t k = 0; k < 300; ++k) CHECK(std::abs(lhs[k] - (a * dx[k] + b * dy[k])) < 1e-12);
}

TEST_CASE("successive fractional delays compose") {
  const auto x = testutil::bandlimited(1024, 1.0);
  const auto two = fractional_delay(fractional_delay(x, 0.3), 0.45);
  const auto one = fractional_delay(x, 0.75);
  CHECK(testutil::max_abs_diff(two.samples(), one.samples(), 3 * kInterpolationGuard) < 1e-6);
}

TEST_CASE("fractional_delay rejects delays beyond a quarter record") {
  const auto x = testutil::random_envelope(64, 1);
  CHECK_THROWS_AS(fractional_delay(x, 16.0), PreconditionError);
  CHECK_NOTHROW(fractional_delay(x, 15.5));
}

TEST_CASE("windowed_fft energy placement and Parseval") {
  const std::size_t n = 64;
  const auto x = testutil::tone(n, 5.0, static_cast<double>(n));
  const auto bins = windowed_fft(x, Window::rect);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 5) CHECK(std::abs(bins[k]) == doctest::Approx(static_cast<double>(n)));
    else CHECK(std::abs(bins[k]) < 1e-9);
  }
  const ComplexEnvelope dc(std::vector<cplx>(n, cplx(2, 0)), 1.0);
  const auto dbins = windowed_fft(dc, Window::rect);
  for (std::size_t k = 1; k < n; ++k) CHECK(std::abs(dbins[k]) < 1e-9);

  const auto r = testutil::random_envelope(1000, 5);
  const auto rb = windowed_fft(r, Window::rect);
  double et = 0.0, ef = 0.0;
  for (auto v : r.samples()) et += std::norm(v);
  for (auto v : rb) ef += std::norm(v);
  CHECK(std::abs(ef / 1000.0 - et) / et < 1e-9);

  const ComplexEnvelope tiny(std::vector<cplx>(7), 1.0);
  CHECK_THROWS_AS(windowed_fft(tiny, Window::rect), PreconditionError);
}

TEST_CASE("fft and ifft invert each other") {
  const auto x = testutil::random_envelope(200, 9);
  const auto back = ifft(fft(x.samples()));
  CHECK(testutil::max_abs_diff(x.samples(), back) < 1e-12);
}

TEST_CASE("wrap_phase range") {
  CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_phase(0.1 + 10 * kTwoPi) == doctest::Approx(0.1));
}
