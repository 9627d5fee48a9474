#include <cmath>
#include <limits>
#include <random>

#include "unisynth/comm_metrics.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

EvmReport evm(std::span<const cplx> received, std::span<const cplx> reference) {
  if (received.size() != reference.size())
    throw PreconditionError("received and reference symbol counts differ");
  require(!reference.empty(), "EVM needs at least one symbol");
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    err += std::norm(received[k] - reference[k]);
    ref += std::norm(reference[k]);
  }
  if (!(ref > 0.0)) throw PreconditionError("reference symbols have zero power");
  EvmReport r;
  r.n_symbols = reference.size();
  r.evm_rms = std::sqrt(err / ref);
  r.evm_db = r.evm_rms > 0.0 ? 20.0 * std::log10(r.evm_rms) : -std::numeric_limits<double>::infinity();
  r.reference_rms = std::sqrt(ref / static_cast<double>(reference.size()));
  return r;
}

Bits random_bits(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Bits bits(count);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  return bits;
}

std::vector<cplx> random_symbols(const Constellation& c, std::size_t count, std::uint64_t seed) {
  require(c.size() > 0, "empty constellation");
  std::mt19937_64 rng(seed);
  std::vector<cplx> out(count);
  for (auto& s : out) s = c.points[rng() % c.size()];
  return out;
}

CommRun run_comm(const TxChain& chain, const CommSetup& setup) {
  require(setup.n_symbols > 0, "link needs at least one symbol");
  CommRun run{build_constellation(setup.scheme), ComplexEnvelope({cplx{}}, 1.0), {}, {}, {}, {}, {}, 0};
  const auto& c = run.constellation;
  SymbolStream stream;
  stream.symbol_period = 1.0 / setup.symbol_rate;
  if (c.bits_per_symbol > 0) {
    const auto bits = random_bits(setup.n_symbols * static_cast<std::size_t>(c.bits_per_symbol), setup.bit_seed);
    stream = map_bits(bits, c, stream.symbol_period);
  } else {
    stream.symbols = random_symbols(c, setup.n_symbols, setup.bit_seed);
  }
  run.reference = stream.symbols;
  const auto shaped = shape_symbols(stream, setup.shape);
  run.tx = run_chain(chain, *shaped);

  DemodOptions opts;
  opts.reference = run.reference;
  run.demod = demodulate(run.tx, c, setup.shape, opts);
  const auto first = static_cast<long>(run.demod.first_symbol);
  run.reference_trimmed.assign(run.reference.begin() + first,
                               run.reference.begin() + first + static_cast<long>(run.demod.soft.size()));

  if (setup.equalizer_taps) {
    run.equalizer = lms_equalizer_train(run.demod.soft, run.reference_trimmed, *setup.equalizer_taps,
                                        setup.equalizer_step);
    opts.equalizer = run.equalizer;
    run.demod = demodulate(run.tx, c, setup.shape, opts);
  }
  run.evm = evm(run.demod.soft, run.reference_trimmed);
  for (std::size_t k = 0; k < run.demod.decisions.size(); ++k)
    if (run.demod.decisions[k] != c.nearest(run.reference_trimmed[k])) ++run.symbol_errors;
  return run;
}

}  // namespace unisynth
