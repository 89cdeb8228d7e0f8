#include "pxp/semiclassics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pxp {

void ModelParams::validate() const {
    if (omega <= 0) throw DomainError("omega must be positive");
    if (L < 2 || L % 2 != 0) throw DomainError("unit-cell size L must be even and >= 2");
}

CellCoefficients cell_coefficients(const std::vector<double>& thetas) {
    const int L = static_cast<int>(thetas.size());
    std::vector<double> s2(L);
    double Pi = 1.0;
    for (int i = 0; i < L; ++i) {
        const double s = std::sin(thetas[i]);
        s2[i] = s * s;
        Pi *= s2[i];
    }
    if (std::abs(1.0 - Pi) < 1e-10)
        throw SingularCell("cell coefficients singular: Pi = prod sin^2 within 1e-10 of 1");

    CellCoefficients c;
    c.pi_product = Pi;
    c.a.resize(L);
    c.A.resize(L);
    c.phi_cap.resize(L);
    for (int m = 0; m < L; ++m) {
        // a_m = 1 + sum_{k=1}^{L-1} (-1)^k prod_{l=1}^{k} sin^2 theta_{m-l}
        double a = 1.0, run = 1.0, sign = -1.0;
        for (int k = 1; k <= L - 1; ++k) {
            run *= s2[(m - k % L + L) % L];
            a += sign * run;
            sign = -sign;
        }
        c.a[m] = a;
        c.A[m] = a / (1.0 - Pi);
        c.phi_cap[m] = c.A[m] * s2[m];
    }
    return c;
}

std::array<double, 2> eom_rhs_l2(double theta1, double theta2, double omega) {
    // -(omega/2) [ sin(t1) cos^2(t1) tan(t2) + cos(t2) ], and (1<->2) swapped.
    auto bracket = [](double ta, double tb) {
        const double sa = std::sin(ta), ca = std::cos(ta), cb = std::cos(tb);
        double term;
        if (std::abs(cb) < 1e-8) {
            // tan(tb) diverges, but along the flow the numerator
            // sin(ta) cos^2(ta) vanishes with it: at the orbit turning points
            // sin(ta) -> 0, and at the corner saddle (+-pi/2, +-pi/2)
            // cos^2(ta) ~ cos(tb), so the limit stays finite. Only a point
            // genuinely off the manifold (bounded numerator, vanishing
            // denominator) is singular.
            const double num = sa * ca * ca * std::sin(tb);
            if (std::abs(num) <= 10.0 * std::abs(cb)) {
                term = (cb != 0.0) ? num / cb : 0.0;
            } else {
                throw SingularCell("eom_rhs_l2: tan(theta) singular away from its limit point");
            }
        } else {
            term = sa * ca * ca * std::sin(tb) / cb;
        }
        return term + cb;
    };
    return {-0.5 * omega * bracket(theta1, theta2),
            -0.5 * omega * bracket(theta2, theta1)};
}

std::vector<double> eom_rhs_general(const UnitCellState& s, const ModelParams& p) {
    const int L = static_cast<int>(s.thetas.size());
    if (L == 2) {
        auto d = eom_rhs_l2(s.thetas[0], s.thetas[1], p.omega);
        return {d[0], d[1]};
    }
    const CellCoefficients c = cell_coefficients(s.thetas);
    std::vector<double> dth(L);
    for (int i = 0; i < L; ++i) {
        const int ip = (i + 1) % L, im = (i - 1 + L) % L;
        const double ratio = c.A[im] / c.A[i];
        dth[i] = -0.5 * p.omega *
                 (std::cos(s.thetas[ip]) +
                  ratio * std::sin(s.thetas[im]) * std::cos(s.thetas[im]) * std::sin(s.thetas[i]));
    }
    return dth;
}

namespace {

UnitCellState axpy_state(const UnitCellState& y, double h, const std::vector<double>& k) {
    UnitCellState out = y;
    for (size_t i = 0; i < out.thetas.size(); ++i) out.thetas[i] += h * k[i];
    return out;
}

} // namespace

Trajectory integrate(const UnitCellState& state0, const ModelParams& p,
                     double t_end, double dt) {
    p.validate();
    if (dt <= 0) throw DomainError("integrate: dt must be positive");
    if (t_end < 0) throw DomainError("integrate: t_end must be nonnegative");
    if (state0.thetas.size() != static_cast<size_t>(p.L))
        throw DimensionMismatch("integrate: state size != L");

    const long nsteps = std::lround(t_end / dt);
    Trajectory traj;
    traj.times.reserve(nsteps + 1);
    traj.states.reserve(nsteps + 1);
    UnitCellState y = state0;
    if (y.phis.empty()) y.phis.assign(p.L, 0.0);
    traj.times.push_back(0.0);
    traj.states.push_back(y);
    for (long n = 1; n <= nsteps; ++n) {
        const auto k1 = eom_rhs_general(y, p);
        const auto k2 = eom_rhs_general(axpy_state(y, 0.5 * dt, k1), p);
        const auto k3 = eom_rhs_general(axpy_state(y, 0.5 * dt, k2), p);
        const auto k4 = eom_rhs_general(axpy_state(y, dt, k3), p);
        for (int i = 0; i < p.L; ++i)
            y.thetas[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        traj.times.push_back(n * dt);
        traj.states.push_back(y);
    }
    return traj;
}

namespace {

// Per-angle wrapped distance between states.
double wrapped_distance(const UnitCellState& a, const UnitCellState& b, double wrap) {
    double d2 = 0;
    for (size_t i = 0; i < a.thetas.size(); ++i) {
        double d = std::remainder(a.thetas[i] - b.thetas[i], wrap);
        d2 += d * d;
    }
    return std::sqrt(d2);
}

} // namespace

OrbitInfo find_orbit_period(const Trajectory& traj, double angle_period) {
    const size_t n = traj.times.size();
    if (n < 3) throw NoReturnFound("find_orbit_period: trajectory too short");

    const UnitCellState& start = traj.states.front();
    std::vector<double> dist(n);
    for (size_t i = 0; i < n; ++i)
        dist[i] = wrapped_distance(traj.states[i], start, angle_period);

    // Scale for "has left the neighborhood": a fraction of the largest
    // excursion. A constant trajectory never leaves and has no return.
    const double dmax = *std::max_element(dist.begin(), dist.end());
    const double leave = 0.25 * dmax;
    if (dmax <= 0 || !(leave > 0))
        throw NoReturnFound("find_orbit_period: trajectory never leaves the initial point");

    // First local minimum of the distance after the trajectory has gone out
    // and come back below the leave level.
    bool left = false;
    size_t best = 0;
    for (size_t i = 1; i + 1 < n; ++i) {
        if (!left && dist[i] > leave) left = true;
        if (left && dist[i] < leave && dist[i] <= dist[i - 1] && dist[i] < dist[i + 1]) {
            best = i;
            break;
        }
    }
    if (best == 0) throw NoReturnFound("find_orbit_period: no recurrence below threshold");

    // Parabolic refinement through the three samples. The distance itself is
    // V-shaped at a transversal return, so interpolate its square, which is
    // quadratic there.
    const double d0 = dist[best - 1] * dist[best - 1];
    const double d1 = dist[best] * dist[best];
    const double d2 = dist[best + 1] * dist[best + 1];
    const double denom = d0 - 2 * d1 + d2;
    double shift = 0;
    if (std::abs(denom) > 1e-300) shift = 0.5 * (d0 - d2) / denom;
    shift = std::clamp(shift, -0.5, 0.5);
    const double dt = traj.times[1] - traj.times[0];

    OrbitInfo info;
    info.period = traj.times[best] + shift * dt;
    info.frequency = 2.0 * M_PI / info.period;
    info.closure_error = dist[best];
    return info;
}

std::array<double, 2> first_harmonic_orbit(double t, double omega_harmonic) {
    const double w = omega_harmonic;
    return {-(M_PI / 2.0) * (1.0 - std::cos(w * t)),
            (M_PI / 2.0) * (1.0 - std::sin(w * t))};
}

UnitCellState z2_initial_state(int L) {
    UnitCellState s;
    s.thetas.assign(L, 0.0);
    s.phis.assign(L, 0.0);
    for (int i = 1; i < L; i += 2) s.thetas[i] = M_PI / 2.0;
    return s;
}

} // namespace pxp
