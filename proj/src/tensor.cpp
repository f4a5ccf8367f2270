#include "layerscope/tensor.hpp"

namespace layerscope {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Dimension: return "dimension error";
    case ErrorCode::Validation: return "validation error";
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::Truncated: return "truncated file";
    case ErrorCode::MalformedHeader: return "malformed header";
    case ErrorCode::ShapeMismatch: return "shape mismatch";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::Numerical: return "numerical error";
    case ErrorCode::Io: return "i/o error";
  }
  return "error";
}

Series<double> linear_resample(const Series<double>& series, Index target_len) {
  const Index n = series.size();
  require(n >= 2, ErrorCode::Validation, "linear_resample: need at least 2 samples");
  require(target_len >= 1, ErrorCode::Validation, "linear_resample: target length must be positive");

  Series<double> out(target_len);
  if (target_len == 1) {
    out[0] = series[0];
    return out;
  }
  // Position j maps to j*(n-1)/(target_len-1); kept as an exact rational so
  // that the integer part never drifts.
  const Index num = n - 1;
  const Index den = target_len - 1;
  for (Index j = 0; j < target_len; ++j) {
    const Index whole = (j * num) / den;
    const Index rem = (j * num) % den;
    if (rem == 0) {
      out[j] = series[whole];
    } else {
      const double frac = static_cast<double>(rem) / static_cast<double>(den);
      out[j] = series[whole] + frac * (series[whole + 1] - series[whole]);
    }
  }
  return out;
}

}  // namespace layerscope
