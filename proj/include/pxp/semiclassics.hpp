#pragma once
#include <array>
#include <vector>
#include "pxp/errors.hpp"

// TDVP equations of motion for the chi=2 variational ansatz on a unit cell of
// even size L, the Z2 periodic orbit, and its first-harmonic approximation.
//
// Convention note: all angles here are the "full-angle" variables of the
// closed-form equations of motion (on-site amplitudes cos(theta), sin(theta)).
// In these variables the Z2 product state is (0, pi/2); the Bloch half-angle
// labeling used for Wigner-function coordinates maps onto these via
// theta_full = theta_half / 2.

namespace pxp {

struct ModelParams {
    double omega = 1.0; // Rabi frequency
    int L = 2;          // unit-cell size, even

    void validate() const;
};

struct UnitCellState {
    std::vector<double> thetas; // unwrapped, radians
    std::vector<double> phis;   // frozen at 0 on the Z2-class orbit
};

struct CellCoefficients {
    double pi_product = 0;       // Pi = prod_i sin^2 theta_i
    std::vector<double> a;       // a_m = 1 + sum_{k=1}^{L-1} (-1)^k prod_{l=1}^k sin^2 theta_{m-l}
    std::vector<double> A;       // A_m = a_m / (1 - Pi)
    std::vector<double> phi_cap; // Phi_m = A_m sin^2 theta_m = 1 - A_{m+1}
};

struct Trajectory {
    std::vector<double> times;
    std::vector<UnitCellState> states;
};

struct OrbitInfo {
    double period = 0;
    double frequency = 0; // 2*pi/period
    double closure_error = 0;
};

CellCoefficients cell_coefficients(const std::vector<double>& thetas);

// Closed-form L=2 right-hand side; the tan(theta2) singularity is evaluated
// through its limit when sin(theta1) vanishes simultaneously.
std::array<double, 2> eom_rhs_l2(double theta1, double theta2, double omega);

std::vector<double> eom_rhs_general(const UnitCellState& s, const ModelParams& p);

// Fixed-step classical RK4. Samples every dt up to t_end inclusive (within
// rounding); state0 is the first entry.
Trajectory integrate(const UnitCellState& state0, const ModelParams& p,
                     double t_end, double dt);

// Poincare-style recurrence search: closest approach to the initial state
// under per-angle wrapped distance (wrap period angle_period), refined by
// parabolic interpolation. angle_period = 2*pi is the generic choice; the Z2
// orbit pipeline passes pi because theta and theta +- pi describe the same
// physical state on this manifold (gauge sign of the on-site amplitudes).
OrbitInfo find_orbit_period(const Trajectory& traj, double angle_period = 6.283185307179586);

// First-harmonic approximation of the Z2 orbit:
//   theta1(t) = -(pi/2)(1 - cos(w t)),  theta2(t) = (pi/2)(1 - sin(w t))
// where w is the angular frequency of the full (theta1, theta2) loop.
std::array<double, 2> first_harmonic_orbit(double t, double omega_harmonic);

// Z2-class initial point: odd sites 0, even sites pi/2 (full-angle variables).
UnitCellState z2_initial_state(int L);

} // namespace pxp
