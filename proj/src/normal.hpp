#pragma once

namespace rctadjust {

/// Standard normal CDF, accurate over the full double range.
double normal_cdf(double x);

/// Standard normal quantile (inverse CDF) for p in (0, 1); absolute error
/// below 1e-9 across the domain. Throws Error(InvalidArgument) outside (0, 1).
double normal_quantile(double p);

}  // namespace rctadjust
