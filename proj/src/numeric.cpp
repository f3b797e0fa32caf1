#include "thermosteer/numeric.hpp"

namespace thermosteer {

const NumericConfig& NumericConfig::defaults() {
  static const NumericConfig cfg;
  return cfg;
}

}  // namespace thermosteer
