#include "ccnet/kernels.hpp"

#include <cstdlib>
#include <string>

#include "ccnet/error.hpp"

namespace ccnet::kernels {

#ifndef CCNET_BUILD_AVX2
template <>
const Table<float>* avx2_table<float>() {
  return nullptr;
}
template <>
const Table<double>* avx2_table<double>() {
  return nullptr;
}
#endif

namespace {

enum class Choice { scalar, avx2 };

Choice decide() {
  const char* env = std::getenv("CCNET_KERNELS");
  if (env != nullptr) {
    const std::string want(env);
    if (want == "scalar") return Choice::scalar;
    if (want == "avx2") {
      if (avx2_table<float>() == nullptr)
        throw InputError("CCNET_KERNELS=avx2 but this build/CPU has no AVX2 kernels");
      return Choice::avx2;
    }
    throw InputError("CCNET_KERNELS must be 'scalar' or 'avx2', got '" + want + "'");
  }
  return avx2_table<float>() != nullptr ? Choice::avx2 : Choice::scalar;
}

Choice active_choice() {
  static const Choice c = decide();
  return c;
}

}  // namespace

template <>
const Table<float>& active_table<float>() {
  return active_choice() == Choice::avx2 ? *avx2_table<float>() : scalar_table<float>();
}

template <>
const Table<double>& active_table<double>() {
  return active_choice() == Choice::avx2 ? *avx2_table<double>() : scalar_table<double>();
}

std::string active_name() { return active_choice() == Choice::avx2 ? "avx2" : "scalar"; }

}  // namespace ccnet::kernels
