#pragma once

namespace qreset {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF, accurate to ~1e-14 (rational approximation
/// plus one Halley refinement). Throws InvalidParameter outside (0, 1).
double normal_quantile(double p);

}  // namespace qreset
