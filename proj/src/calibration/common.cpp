#include <algorithm>

#include "unisynth/calibration.hpp"

namespace unisynth {

TxChain remove_labeled(const TxChain& chain, const std::string& label) {
  TxChain out = chain;
  std::erase_if(out.stages, [&](const Stage& s) { return s.label == label; });
  return out;
}

TxChain insert_correction(const TxChain& chain, Stage correction) {
  TxChain out = remove_labeled(chain, correction.label);
  out.stages.insert(out.stages.begin(), std::move(correction));
  return out;
}

}  // namespace unisynth
