#pragma once
#include <Eigen/Dense>

namespace pxp {

// Matrix exponential by scaling-and-squaring with a fixed diagonal Pade-6
// approximant. Suitable for the small (L x L) tangent-space slices.
Eigen::MatrixXd expm_pade(const Eigen::MatrixXd& A);

// Truncated 6th-order Taylor series (with the same scaling-and-squaring);
// intended for small-norm arguments F*dt. Kept as an independent route so the
// two implementations can be cross-checked.
Eigen::MatrixXd expm_series6(const Eigen::MatrixXd& A);

} // namespace pxp
