#pragma once

#include "pathdev/transport.hpp"

namespace pathdev {

struct DisplacementVector {
  double anchor_s = 0.0;
  double target_t = 0.0;
  TangentVector vector;
};

/// Panel count used when the caller passes 0: |t - s| / law step, rounded up
/// to an even number (at least 2).
int default_panels(const TransportLaw& law, double s, double t);

/// d_s(t) = integral from s to t of H(s, u) gamma'(u) du, composite Simpson
/// over `panels` panels (rounded up to even; 0 selects the default).
DisplacementVector displacement_vector(const TransportLaw& law, const Curve& gamma, double s, double t,
                                       int panels = 0);

/// |d_r(s) - d_r(t) - H(r, t) d_t(s)|.
double composition_residual(const TransportLaw& law, const Curve& gamma, double r, double s, double t,
                            int panels = 0);

/// (t - s) gamma'(s) at gamma(s).
TangentVector infinitesimal_displacement(const Curve& gamma, double s, double t);

struct RecoveryResult {
  double max_inversion_error = 0.0;
  bool monotone = true;
  std::vector<double> samples;
  std::vector<double> recovered;
};

/// Inverts t -> d_s(t) along the functional phi(t) = <d_s(t), e>, where e is
/// the normalized displacement to the far end of the interval. A sign change
/// in the increments of phi over the sample grid sets `monotone = false`.
RecoveryResult coordinate_recovery_check(const TransportLaw& law, const Curve& gamma, double s, int samples,
                                         int panels = 0);

}  // namespace pathdev
