#pragma once
#include <functional>
#include <vector>
#include <Eigen/Dense>
#include "pxp/semiclassics.hpp"

// Tangent-space dynamics around the Z2 periodic orbit: Jacobians of the
// equations of motion, one-period monodromy matrices (direct product and the
// symmetry-composed form), Lyapunov spectra, KS entropy, and a brute-force
// two-trajectory cross-check.
//
// omega_orbit throughout is the physical revival frequency reported by
// find_orbit_period on the Z2 orbit (~ 0.652 at Omega=1). The harmonic drive
// traverses the full (theta1, theta2) loop at half that angular frequency.

namespace pxp {

enum class JacobianMode { analytic, finite_difference };

struct TangentJacobian {
    Eigen::MatrixXd entries; // F_ij = d f_i / d theta_j
};

struct MonodromyMatrix {
    Eigen::MatrixXcd entries;
    double period = 0; // tau of the full tangent loop
};

struct LyapunovSpectrum {
    std::vector<double> exponents; // sorted descending
    int unit_cell = 0;
};

TangentJacobian eom_jacobian(const std::vector<double>& thetas, const ModelParams& p,
                             JacobianMode mode);

// Jacobian on the first-harmonic Z2 orbit: odd sites at theta1(t), even at
// theta2(t) (0-based: even indices carry theta1).
TangentJacobian z2_orbit_jacobian(double t, int L, double omega_orbit, double omega = 1.0);

// Ordered midpoint product T = prod_k exp(F(t_k) dt), t_k = (k - 1/2) dt,
// over one full loop period; earliest factor rightmost. The step count is
// rounded up to a multiple of 8 so samples stay clear of (and symmetric
// about) the singular instants 0, tau/4, tau/2, 3 tau/4.
MonodromyMatrix monodromy_direct(int L, double omega_orbit, double dt, double omega = 1.0);

// Generic ordered product for a caller-supplied tangent field (used by tests
// and by the exact-orbit cross-check mode).
MonodromyMatrix monodromy_of(const std::function<Eigen::MatrixXd(double)>& F,
                             double period, int nsteps);

// Symmetry-composed monodromy from the eighth-period propagator Q and the
// shift matrices S_x, S_y:
//   T = [S_y S_x Q^-1 S_x^-1 Q S_y^-1 S_x Q^-1 S_x^-1 Q]^2
// The time-reflected quarter segments enter through Q^-1 (the reflection
// reverses orientation).
MonodromyMatrix monodromy_symmetric(int L, double omega_orbit, double dt, double omega = 1.0);

LyapunovSpectrum lyapunov_spectrum(const MonodromyMatrix& T);

// One spectrum per chain length (direct-product monodromy, tau/steps step
// size). OpenMP-parallel over the lengths, with a serial reference twin.
std::vector<LyapunovSpectrum> spectra_sweep(const std::vector<int>& Ls,
                                            double omega_orbit, int steps,
                                            double omega = 1.0);
std::vector<LyapunovSpectrum> spectra_sweep_serial(const std::vector<int>& Ls,
                                                   double omega_orbit, int steps,
                                                   double omega = 1.0);

// Sum of positive exponents; |lambda| below the pairing tolerance counts as 0.
double ks_entropy(const LyapunovSpectrum& s, double pairing_tol = 1e-6);

// Benettin two-trajectory estimate of the leading exponent: integrate a pair
// offset by eps along a pseudo-random direction, renormalizing every interval.
double brute_force_max_exponent(const UnitCellState& state0, const ModelParams& p,
                                double eps, double horizon, unsigned long long seed = 1,
                                double dt = 2e-3);

// Same estimator for an arbitrary autonomous flow dx/dt = rhs(x).
double brute_force_max_exponent_flow(
    const std::function<std::vector<double>(const std::vector<double>&)>& rhs,
    const std::vector<double>& x0, double eps, double horizon,
    double renorm_interval, double dt, unsigned long long seed = 1);

} // namespace pxp
