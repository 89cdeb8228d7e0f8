#include "pxp/lyapunov.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "pxp/expm.hpp"

namespace pxp {

namespace {

// Analytic Jacobian of the general-L right-hand side
//   f_i = -(Omega/2) [ cos th_{i+1} + (A_{i-1}/A_i) sin th_{i-1} cos th_{i-1} sin th_i ].
// Needs dA_m/dth_j with A_m = a_m/(1 - Pi); products are accumulated with the
// j-th factor excluded so sin(th_j) = 0 causes no division trouble.
Eigen::MatrixXd analytic_jacobian(const std::vector<double>& thetas, double omega) {
    const int L = static_cast<int>(thetas.size());
    std::vector<double> s(L), c(L), s2(L);
    for (int i = 0; i < L; ++i) {
        s[i] = std::sin(thetas[i]);
        c[i] = std::cos(thetas[i]);
        s2[i] = s[i] * s[i];
    }
    double Pi = 1.0;
    for (int i = 0; i < L; ++i) Pi *= s2[i];
    if (std::abs(1.0 - Pi) < 1e-10)
        throw SingularCell("eom_jacobian: Pi within 1e-10 of 1");

    // a_m and dA/dth
    std::vector<double> a(L);
    Eigen::MatrixXd dA = Eigen::MatrixXd::Zero(L, L); // dA(m, j) = dA_m/dth_j
    std::vector<double> A(L);

    // dPi/dth_j = 2 s_j c_j * prod_{l != j} s2_l
    std::vector<double> dPi(L);
    for (int j = 0; j < L; ++j) {
        double excl = 1.0;
        for (int l = 0; l < L; ++l)
            if (l != j) excl *= s2[l];
        dPi[j] = 2.0 * s[j] * c[j] * excl;
    }

    for (int m = 0; m < L; ++m) {
        double am = 1.0, run = 1.0, sign = -1.0;
        for (int k = 1; k <= L - 1; ++k) {
            run *= s2[(m - k % L + L) % L];
            am += sign * run;
            sign = -sign;
        }
        a[m] = am;
        A[m] = am / (1.0 - Pi);
    }
    for (int m = 0; m < L; ++m) {
        for (int j = 0; j < L; ++j) {
            // da_m/dth_j: terms k >= dist where index j enters the product.
            double da = 0.0, run_excl = 1.0, sign = -1.0;
            bool seen_j = false;
            for (int k = 1; k <= L - 1; ++k) {
                const int idx = (m - k % L + L) % L;
                if (idx == j)
                    seen_j = true;
                else
                    run_excl *= s2[idx];
                if (seen_j) da += sign * run_excl;
                sign = -sign;
            }
            da *= 2.0 * s[j] * c[j];
            dA(m, j) = (da * (1.0 - Pi) + a[m] * dPi[j]) / ((1.0 - Pi) * (1.0 - Pi));
        }
    }

    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(L, L);
    for (int i = 0; i < L; ++i) {
        const int ip = (i + 1) % L, im = (i - 1 + L) % L;
        const double g = s[im] * c[im]; // sin cos of the left neighbor
        const double R = A[im] / A[i];
        for (int j = 0; j < L; ++j) {
            double d = 0.0;
            if (j == ip) d += -s[ip];
            const double dR = (dA(im, j) * A[i] - A[im] * dA(i, j)) / (A[i] * A[i]);
            d += dR * g * s[i];
            if (j == im) d += R * (c[im] * c[im] - s[im] * s[im]) * s[i];
            if (j == i) d += R * g * c[i];
            F(i, j) = -0.5 * omega * d;
        }
    }
    return F;
}

Eigen::MatrixXd fd_jacobian(const std::vector<double>& thetas, const ModelParams& p) {
    const int L = static_cast<int>(thetas.size());
    const double h = 1e-6;
    Eigen::MatrixXd F(L, L);
    UnitCellState sp, sm;
    sp.thetas = thetas;
    sm.thetas = thetas;
    for (int j = 0; j < L; ++j) {
        sp.thetas[j] = thetas[j] + h;
        sm.thetas[j] = thetas[j] - h;
        const auto fp = eom_rhs_general(sp, p);
        const auto fm = eom_rhs_general(sm, p);
        for (int i = 0; i < L; ++i) F(i, j) = (fp[i] - fm[i]) / (2 * h);
        sp.thetas[j] = thetas[j];
        sm.thetas[j] = thetas[j];
    }
    return F;
}

Eigen::MatrixXcd shift_x(int L) {
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(L, L);
    for (int m = 0; m < L; ++m) S(m, (m + 1) % L) = 1.0;
    return S;
}

Eigen::MatrixXcd shift_y(int L) {
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(L, L);
    const std::complex<double> I(0, 1);
    for (int m = 0; m < L; ++m) S(m, (m + 1) % L) = (m % 2 == 0 ? I : -I);
    return S;
}

} // namespace

TangentJacobian eom_jacobian(const std::vector<double>& thetas, const ModelParams& p,
                             JacobianMode mode) {
    TangentJacobian J;
    if (mode == JacobianMode::analytic)
        J.entries = analytic_jacobian(thetas, p.omega);
    else
        J.entries = fd_jacobian(thetas, p);
    return J;
}

TangentJacobian z2_orbit_jacobian(double t, int L, double omega_orbit, double omega) {
    // Full tangent loop frequency is half the physical revival frequency.
    const double w = 0.5 * omega_orbit;
    const auto th12 = first_harmonic_orbit(t, w);
    std::vector<double> th(L);
    for (int i = 0; i < L; ++i) th[i] = (i % 2 == 0) ? th12[0] : th12[1];
    ModelParams p;
    p.omega = omega;
    p.L = L;
    return eom_jacobian(th, p, JacobianMode::analytic);
}

MonodromyMatrix monodromy_of(const std::function<Eigen::MatrixXd(double)>& F,
                             double period, int nsteps) {
    const double dt = period / nsteps;
    Eigen::MatrixXcd T;
    for (int k = 1; k <= nsteps; ++k) {
        const double t = (k - 0.5) * dt;
        const Eigen::MatrixXd E = expm_pade(F(t) * dt);
        if (k == 1)
            T = E.cast<std::complex<double>>();
        else
            T = E * T;
    }
    MonodromyMatrix M;
    M.entries = T;
    M.period = period;
    return M;
}

MonodromyMatrix monodromy_direct(int L, double omega_orbit, double dt, double omega) {
    const double tau = 2.0 * M_PI / (0.5 * omega_orbit);
    if (dt > tau / 1000)
        throw DomainError("monodromy_direct: dt must be <= tau/1000");
    long n = std::lround(std::ceil(tau / dt));
    n = ((n + 7) / 8) * 8; // multiple of 8 keeps midpoints off the singular instants
    return monodromy_of(
        [L, omega_orbit, omega](double t) {
            return z2_orbit_jacobian(t, L, omega_orbit, omega).entries;
        },
        tau, static_cast<int>(n));
}

MonodromyMatrix monodromy_symmetric(int L, double omega_orbit, double dt, double omega) {
    const double tau = 2.0 * M_PI / (0.5 * omega_orbit);
    const double eighth = tau / 8.0;
    const double n_real = eighth / dt;
    const long n = std::lround(n_real);
    if (n < 1 || std::abs(n * dt - eighth) > 1e-9)
        throw IncommensurateStep("monodromy_symmetric: 8 N dt != tau within 1e-9");

    const MonodromyMatrix Q8 = monodromy_of(
        [L, omega_orbit, omega](double t) {
            return z2_orbit_jacobian(t, L, omega_orbit, omega).entries;
        },
        eighth, static_cast<int>(n));
    const Eigen::MatrixXcd& Q = Q8.entries;
    const Eigen::MatrixXcd Qi = Q.inverse();
    const Eigen::MatrixXcd Sx = shift_x(L), Sy = shift_y(L);
    const Eigen::MatrixXcd Sxi = Sx.inverse(), Syi = Sy.inverse();

    const Eigen::MatrixXcd H = Sy * Sx * Qi * Sxi * Q * Syi * Sx * Qi * Sxi * Q;
    MonodromyMatrix M;
    M.entries = H * H;
    M.period = tau;
    return M;
}

LyapunovSpectrum lyapunov_spectrum(const MonodromyMatrix& T) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(T.entries, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw EigFailure("lyapunov_spectrum: eigen-solver did not converge");
    LyapunovSpectrum s;
    s.unit_cell = static_cast<int>(T.entries.rows());
    s.exponents.reserve(s.unit_cell);
    for (int i = 0; i < s.unit_cell; ++i) {
        const double mag = std::abs(es.eigenvalues()[i]);
        if (mag <= 0) throw EigFailure("lyapunov_spectrum: zero eigenvalue magnitude");
        s.exponents.push_back(std::log(mag) / T.period);
    }
    std::sort(s.exponents.begin(), s.exponents.end(), std::greater<double>());
    return s;
}

double ks_entropy(const LyapunovSpectrum& s, double pairing_tol) {
    double h = 0;
    for (double lam : s.exponents)
        if (lam > pairing_tol) h += lam;
    return h;
}

double brute_force_max_exponent_flow(
    const std::function<std::vector<double>(const std::vector<double>&)>& rhs,
    const std::vector<double>& x0, double eps, double horizon,
    double renorm_interval, double dt, unsigned long long seed) {
    if (eps < 1e-9 || eps > 1e-3)
        throw DomainError("brute_force_max_exponent: eps outside [1e-9, 1e-3]");
    const int n = static_cast<int>(x0.size());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> dir(n);
    double nrm = 0;
    for (int i = 0; i < n; ++i) {
        dir[i] = gauss(rng);
        nrm += dir[i] * dir[i];
    }
    nrm = std::sqrt(nrm);

    std::vector<double> a = x0, b = x0;
    for (int i = 0; i < n; ++i) b[i] += eps * dir[i] / nrm;

    std::vector<double> tmp(n);
    auto rk4_step = [&](std::vector<double>& y) {
        const auto k1 = rhs(y);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
        const auto k2 = rhs(tmp);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
        const auto k3 = rhs(tmp);
        for (int i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
        const auto k4 = rhs(tmp);
        for (int i = 0; i < n; ++i)
            y[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    };

    double log_sum = 0;
    double t = 0;
    while (t < horizon - 1e-12) {
        const double t_next = std::min(t + renorm_interval, horizon);
        while (t < t_next - 1e-12) {
            rk4_step(a);
            rk4_step(b);
            t += dt;
        }
        double d = 0;
        for (int i = 0; i < n; ++i) {
            const double x = b[i] - a[i];
            d += x * x;
        }
        d = std::sqrt(d);
        log_sum += std::log(d / eps);
        // pull b back to distance eps along the current separation direction
        for (int i = 0; i < n; ++i) b[i] = a[i] + (b[i] - a[i]) * (eps / d);
    }
    return log_sum / horizon;
}

namespace {
std::vector<LyapunovSpectrum> sweep_impl(const std::vector<int>& Ls, double omega_orbit,
                                         int steps, double omega, bool parallel) {
    const double tau = 2.0 * M_PI / (0.5 * omega_orbit);
    std::vector<LyapunovSpectrum> out(Ls.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long i = 0; i < static_cast<long>(Ls.size()); ++i)
        out[i] = lyapunov_spectrum(monodromy_direct(Ls[i], omega_orbit, tau / steps, omega));
    return out;
}
} // namespace

std::vector<LyapunovSpectrum> spectra_sweep(const std::vector<int>& Ls, double omega_orbit,
                                            int steps, double omega) {
    return sweep_impl(Ls, omega_orbit, steps, omega, true);
}

std::vector<LyapunovSpectrum> spectra_sweep_serial(const std::vector<int>& Ls,
                                                   double omega_orbit, int steps,
                                                   double omega) {
    return sweep_impl(Ls, omega_orbit, steps, omega, false);
}

double brute_force_max_exponent(const UnitCellState& state0, const ModelParams& p,
                                double eps, double horizon, unsigned long long seed,
                                double dt) {
    p.validate();
    // The orbit's corner passages (theta_odd near pi/2, theta_even near 0)
    // make the general-L right-hand side stiff: some a_m pass through zero
    // and the coupling ratios spike. Cap the tangent speed there; the cap is
    // active for a tiny fraction of each period and leaves the growth-rate
    // estimate at the order-of-magnitude level this estimator is for.
    const double cap = 10.0 * std::fabs(p.omega);
    auto rhs = [&p, cap](const std::vector<double>& th) {
        UnitCellState s;
        s.thetas = th;
        auto f = eom_rhs_general(s, p);
        for (double& v : f) {
            if (!std::isfinite(v))
                v = 0.0;
            else
                v = std::clamp(v, -cap, cap);
        }
        return f;
    };
    // Renormalize roughly every eighth of the ~19.3 tangent-loop period.
    return brute_force_max_exponent_flow(rhs, state0.thetas, eps, horizon, 2.4, dt, seed);
}

} // namespace pxp
