#include <cmath>

#include "unisynth/comm_metrics.hpp"
#include "unisynth/error.hpp"

namespace unisynth {

EvmBudget evm_budget(const TxChain& chain,
                     const std::function<double(const TxChain&)>& measure_evm) {
  for (std::size_t k = 0; k < chain.stages.size(); ++k) {
    const auto& st = chain.stages[k];
    if (!st.fixed && !st.tag)
      throw PreconditionError("stage " + std::to_string(k) + " (" + stage_kind_name(st.spec) +
                              ") has no budget tag; tag it or mark it fixed");
  }
  EvmBudget b;
  double sum_sq = 0.0;
  for (BudgetTerm t : kAllBudgetTerms) {
    TxChain only = chain;
    only.stages.clear();
    bool present = false;
    for (const auto& st : chain.stages) {
      if (st.fixed || st.tag == t) only.stages.push_back(st);
      if (!st.fixed && st.tag == t) present = true;
    }
    const double term = present ? measure_evm(only) : 0.0;
    b.terms[budget_term_name(t)] = term;
    sum_sq += term * term;
  }
  b.total_predicted = std::sqrt(sum_sq);
  b.total_measured = measure_evm(chain);
  return b;
}

EvmBudget evm_budget(const TxChain& chain, const CommSetup& setup) {
  return evm_budget(chain, [&](const TxChain& c) { return run_comm(c, setup).evm.evm_rms; });
}

}  // namespace unisynth
