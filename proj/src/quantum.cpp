#include "pxp/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Dense>
#include <Eigen/SVD>

namespace pxp {

namespace {

// open-boundary constrained dimension: Fibonacci(N+2) with F(1)=F(2)=1
std::size_t fibonacci_dim(int n_sites, Boundary b) {
    // d_open(n) = d(n-1) + d(n-2), d(0)=1, d(1)=2
    std::vector<std::size_t> d(std::max(n_sites + 1, 3));
    d[0] = 1;
    d[1] = 2;
    for (int i = 2; i <= n_sites; ++i) d[i] = d[i - 1] + d[i - 2];
    if (b == Boundary::open) return d[n_sites];
    // periodic = Lucas numbers: L(n) = d_open(n-1) + d_open(n-3)
    if (n_sites == 2) return 3;
    return d[n_sites - 1] + (n_sites >= 3 ? d[n_sites - 3] : 1);
}

std::uint32_t neighbor_mask(int site, int n, Boundary b) {
    std::uint32_t m = 0;
    if (site > 0) m |= 1u << (site - 1);
    if (site < n - 1) m |= 1u << (site + 1);
    if (b == Boundary::periodic) {
        if (site == 0) m |= 1u << (n - 1);
        if (site == n - 1) m |= 1u;
    }
    return m;
}

} // namespace

long ConstrainedBasis::index_of(std::uint32_t c) const {
    const auto it = std::lower_bound(configs.begin(), configs.end(), c);
    if (it == configs.end() || *it != c) return -1;
    return static_cast<long>(it - configs.begin());
}

void ConstrainedBasis::build_adjacency() const {
    const std::size_t d = configs.size();
    offsets_.assign(d + 1, 0);
    std::vector<std::uint32_t> nb(n_sites);
    for (int s = 0; s < n_sites; ++s) nb[s] = neighbor_mask(s, n_sites, boundary);

    std::vector<std::uint32_t> row;
    targets_.clear();
    targets_.reserve(d * 4);
    for (std::size_t i = 0; i < d; ++i) {
        const std::uint32_t c = configs[i];
        for (int s = 0; s < n_sites; ++s) {
            if ((c & nb[s]) != 0) continue; // projector: both neighbors ground
            const long j = index_of(c ^ (1u << s));
            targets_.push_back(static_cast<std::uint32_t>(j));
        }
        offsets_[i + 1] = targets_.size();
    }
}

const std::vector<std::size_t>& ConstrainedBasis::adj_offsets() const {
    if (offsets_.empty()) build_adjacency();
    return offsets_;
}

const std::vector<std::uint32_t>& ConstrainedBasis::adj_targets() const {
    if (offsets_.empty()) build_adjacency();
    return targets_;
}

ConstrainedBasis build_basis(int n_sites, Boundary boundary, std::size_t max_dim) {
    if (n_sites < 2 || n_sites > 32)
        throw DomainError("build_basis: N must be in [2, 32]");
    if (fibonacci_dim(n_sites, boundary) > max_dim)
        throw TooLarge("build_basis: constrained dimension exceeds the memory cap");

    // S(n) = S(n-1) (top bit 0) followed by 2^{n-1} + S(n-2) (top bit 1);
    // both halves sorted, and the second is entirely larger.
    std::vector<std::vector<std::uint32_t>> S(n_sites + 1);
    S[0] = {0u};
    S[1] = {0u, 1u};
    for (int n = 2; n <= n_sites; ++n) {
        S[n] = S[n - 1];
        const std::uint32_t top = 1u << (n - 1);
        for (std::uint32_t c : S[n - 2]) S[n].push_back(top | c);
    }

    ConstrainedBasis b;
    b.n_sites = n_sites;
    b.boundary = boundary;
    if (boundary == Boundary::open) {
        b.configs = std::move(S[n_sites]);
    } else {
        const std::uint32_t seam = 1u | (1u << (n_sites - 1));
        for (std::uint32_t c : S[n_sites])
            if ((c & seam) != seam) b.configs.push_back(c);
    }
    return b;
}

namespace {

void apply_impl(const ConstrainedBasis& basis, const StateVector& x, StateVector& y,
                double omega, bool parallel) {
    const std::size_t d = basis.dim();
    if (x.size() != d) throw DimensionMismatch("hamiltonian_apply: state length != dim");
    y.assign(d, cplx(0, 0));
    const auto& off = basis.adj_offsets();
    const auto& tgt = basis.adj_targets();
    const double half = 0.5 * omega;
#pragma omp parallel for schedule(static) if (parallel)
    for (long long i = 0; i < static_cast<long long>(d); ++i) {
        cplx acc(0, 0);
        for (std::size_t p = off[i]; p < off[i + 1]; ++p) acc += x[tgt[p]];
        y[i] = half * acc;
    }
}

} // namespace

void hamiltonian_apply(const ConstrainedBasis& basis, const StateVector& x,
                       StateVector& y, double omega) {
    apply_impl(basis, x, y, omega, true);
}

void hamiltonian_apply_serial(const ConstrainedBasis& basis, const StateVector& x,
                              StateVector& y, double omega) {
    apply_impl(basis, x, y, omega, false);
}

namespace {

// One Krylov (Lanczos) step: psi <- exp(-i h H) psi. m is the subspace cap.
void krylov_step(const ConstrainedBasis& basis, StateVector& psi, double h,
                 double omega, int m, double tol) {
    const std::size_t d = psi.size();
    double nrm0 = 0;
    for (const cplx& a : psi) nrm0 += std::norm(a);
    nrm0 = std::sqrt(nrm0);
    if (nrm0 == 0) return;

    std::vector<StateVector> V;
    V.reserve(m + 1);
    V.push_back(psi);
    for (cplx& a : V[0]) a /= nrm0;

    std::vector<double> alpha, beta; // tridiagonal entries, all real
    StateVector w;
    int used = 0;
    bool breakdown = false;
    for (int k = 0; k < m; ++k) {
        hamiltonian_apply(basis, V[k], w, omega);
        if (k > 0)
            for (std::size_t i = 0; i < d; ++i) w[i] -= beta[k - 1] * V[k - 1][i];
        cplx a(0, 0);
        for (std::size_t i = 0; i < d; ++i) a += std::conj(V[k][i]) * w[i];
        alpha.push_back(a.real());
        for (std::size_t i = 0; i < d; ++i) w[i] -= a * V[k][i];
        double b = 0;
        for (const cplx& z : w) b += std::norm(z);
        b = std::sqrt(b);
        used = k + 1;
        if (b < 1e-14) { // happy breakdown: subspace is invariant
            breakdown = true;
            break;
        }
        beta.push_back(b);
        if (used == m) break;
        V.push_back(w);
        for (cplx& z : V.back()) z /= b;
    }

    // exp(-i h T) e1 through the eigen-decomposition of the real tridiagonal T
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(used, used);
    for (int k = 0; k < used; ++k) {
        T(k, k) = alpha[k];
        if (k + 1 < used) T(k, k + 1) = T(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success)
        throw ConvergenceFailure("krylov_step: tridiagonal eigensolver failed");
    Eigen::VectorXcd coeff = Eigen::VectorXcd::Zero(used);
    const Eigen::MatrixXd& U = es.eigenvectors();
    for (int k = 0; k < used; ++k) {
        cplx s(0, 0);
        for (int l = 0; l < used; ++l) {
            const double ph = -h * es.eigenvalues()[l];
            s += U(k, l) * U(0, l) * cplx(std::cos(ph), std::sin(ph));
        }
        coeff[k] = s;
    }

    if (!breakdown && used == m) {
        const double err = beta.size() >= static_cast<std::size_t>(used)
                               ? beta[used - 1] * std::abs(coeff[used - 1]) * h
                               : 0.0;
        if (err > tol)
            throw ConvergenceFailure("krylov_step: local error estimate " +
                                     std::to_string(err) + " above tolerance at step " +
                                     std::to_string(h));
    }

    for (std::size_t i = 0; i < d; ++i) {
        cplx acc(0, 0);
        for (int k = 0; k < used; ++k) acc += coeff[k] * V[k][i];
        psi[i] = nrm0 * acc;
    }
}

void rk4_schrodinger_step(const ConstrainedBasis& basis, StateVector& psi, double h,
                          double omega) {
    const std::size_t d = psi.size();
    const cplx mi(0, -1);
    StateVector k1, k2, k3, k4, tmp(d);
    hamiltonian_apply(basis, psi, k1, omega);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = psi[i] + mi * (0.5 * h) * k1[i];
    hamiltonian_apply(basis, tmp, k2, omega);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = psi[i] + mi * (0.5 * h) * k2[i];
    hamiltonian_apply(basis, tmp, k3, omega);
    for (std::size_t i = 0; i < d; ++i) tmp[i] = psi[i] + mi * h * k3[i];
    hamiltonian_apply(basis, tmp, k4, omega);
    // assemble -i H contributions: k's hold H psi pieces, so multiply by -i
    for (std::size_t i = 0; i < d; ++i)
        psi[i] += mi * (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

} // namespace

std::vector<StateVector> evolve(const ConstrainedBasis& basis, const StateVector& state0,
                                const std::vector<double>& t_grid, double dt,
                                EvolveMethod method, double omega) {
    if (state0.size() != basis.dim())
        throw DimensionMismatch("evolve: state length != basis dim");
    if (dt <= 0) throw DomainError("evolve: dt must be positive");
    const double step_cap = (method == EvolveMethod::krylov) ? 0.1 / omega : dt;
    const double h_max = std::min(dt, step_cap);

    std::vector<StateVector> out;
    out.reserve(t_grid.size());
    StateVector psi = state0;
    double t = 0;
    const int m = std::min<std::size_t>(20, basis.dim());
    for (double target : t_grid) {
        if (target < t - 1e-12) throw DomainError("evolve: t_grid must be ascending");
        while (target - t > 1e-12) {
            const double h = std::min(h_max, target - t);
            if (method == EvolveMethod::krylov)
                krylov_step(basis, psi, h, omega, m, 1e-10);
            else
                rk4_schrodinger_step(basis, psi, h, omega);
            t += h;
        }
        out.push_back(psi);
    }
    return out;
}

double rydberg_density(const ConstrainedBasis& basis, const StateVector& state, int site) {
    if (site < 0 || site >= basis.n_sites)
        throw DomainError("rydberg_density: site out of range");
    if (state.size() != basis.dim())
        throw DimensionMismatch("rydberg_density: state length != dim");
    const std::uint32_t bit = 1u << site;
    double p = 0;
    for (std::size_t i = 0; i < basis.dim(); ++i)
        if (basis.configs[i] & bit) p += std::norm(state[i]);
    return p;
}

double entanglement_entropy(const ConstrainedBasis& basis, const StateVector& state, int cut) {
    const int n = basis.n_sites;
    if (cut < 1 || cut > n - 1) throw DomainError("entanglement_entropy: cut out of range");
    if (state.size() != basis.dim())
        throw DimensionMismatch("entanglement_entropy: state length != dim");
    if (basis.boundary != Boundary::open)
        throw DomainError("entanglement_entropy: open boundaries only");

    const ConstrainedBasis left = build_basis(std::max(cut, 2), Boundary::open);
    const ConstrainedBasis right = build_basis(std::max(n - cut, 2), Boundary::open);
    // cut = 1 or n-1 leaves a single site; handle through a 2-element basis
    const std::size_t dl = (cut == 1) ? 2 : left.dim();
    const std::size_t dr = (n - cut == 1) ? 2 : right.dim();

    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dl, dr);
    const std::uint32_t lmask = (cut < 32) ? ((1u << cut) - 1u) : 0xffffffffu;
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const std::uint32_t c = basis.configs[i];
        const std::uint32_t lc = c & lmask;
        const std::uint32_t rc = c >> cut;
        const long il = (cut == 1) ? static_cast<long>(lc) : left.index_of(lc);
        const long ir = (n - cut == 1) ? static_cast<long>(rc) : right.index_of(rc);
        M(il, ir) = state[i];
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
    if (svd.info() != Eigen::Success)
        throw SVDFailure("entanglement_entropy: SVD did not converge");
    double S = 0;
    for (int k = 0; k < svd.singularValues().size(); ++k) {
        const double p = svd.singularValues()[k] * svd.singularValues()[k];
        if (p > 1e-16) S -= p * std::log(p);
    }
    return S;
}

double loschmidt_echo(const StateVector& state_t, const StateVector& state_0) {
    if (state_t.size() != state_0.size())
        throw DimensionMismatch("loschmidt_echo: length mismatch");
    cplx ov(0, 0);
    for (std::size_t i = 0; i < state_t.size(); ++i)
        ov += std::conj(state_t[i]) * state_0[i];
    return std::abs(ov);
}

StateVector z2_state(const ConstrainedBasis& basis) {
    std::uint32_t c = 0;
    for (int i = 1; i < basis.n_sites; i += 2) c |= 1u << i;
    const long idx = basis.index_of(c);
    if (idx < 0) throw DomainError("z2_state: Z2 pattern not in basis");
    StateVector psi(basis.dim(), cplx(0, 0));
    psi[idx] = 1.0;
    return psi;
}

StateVector mps_state_vector(const std::vector<double>& thetas,
                             const std::vector<double>& phis,
                             const ConstrainedBasis& basis) {
    const int n = basis.n_sites;
    if (thetas.size() != static_cast<std::size_t>(n) ||
        phis.size() != static_cast<std::size_t>(n))
        throw DimensionMismatch("mps_state_vector: angle lists must have length N");

    StateVector amps(basis.dim());
    double nrm2 = 0;
    for (std::size_t k = 0; k < basis.dim(); ++k) {
        const std::uint32_t c = basis.configs[k];
        // 2x2 product, row vector v_L^T = (1, 0) carried through
        cplx r0(1, 0), r1(0, 0);
        for (int i = 0; i < n; ++i) {
            cplx n0, n1;
            if ((c >> i) & 1u) {
                // A^r = [[0, i e^{i phi} sin th], [0, 0]]
                const cplx e = std::polar(1.0, phis[i]);
                n0 = cplx(0, 0);
                n1 = r0 * (cplx(0, 1) * e * std::sin(thetas[i]));
            } else {
                // A^g = [[cos th, 0], [1, 0]]
                n0 = r0 * std::cos(thetas[i]) + r1;
                n1 = cplx(0, 0);
            }
            r0 = n0;
            r1 = n1;
        }
        const cplx amp = r0 + r1; // contract with v_R = (1, 1)
        amps[k] = amp;
        nrm2 += std::norm(amp);
    }
    const double nrm = std::sqrt(nrm2);
    if (nrm > 0)
        for (cplx& a : amps) a /= nrm;
    return amps;
}

namespace {

std::vector<std::size_t> detect_peaks(const std::vector<double>& t,
                                      const std::vector<double>& y, double minsep) {
    std::vector<double> sorted = y;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (!(y[i] >= y[i - 1] && y[i] > y[i + 1] && y[i] > median)) continue;
        if (!out.empty() && t[i] - t[out.back()] < minsep) {
            if (y[i] > y[out.back()]) out.back() = i;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

} // namespace

FitResult fit_decay_rate(const ObservableSeries& series, FitKind kind,
                         double min_peak_separation) {
    const auto& t = series.times;
    const auto& y = series.values;
    if (t.size() != y.size() || t.size() < 2)
        throw DimensionMismatch("fit_decay_rate: malformed series");

    FitResult res;
    if (kind == FitKind::linear) {
        const std::size_t n = t.size();
        double st = 0, sy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            st += t[i];
            sy += y[i];
        }
        const double tb = st / n, yb = sy / n;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sxx += (t[i] - tb) * (t[i] - tb);
            sxy += (t[i] - tb) * (y[i] - yb);
        }
        const double slope = (sxx > 0) ? sxy / sxx : 0.0;
        double ssr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - yb - slope * (t[i] - tb);
            ssr += r * r;
        }
        res.rate = std::abs(slope);
        res.stderr_ = (n > 2 && sxx > 0) ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
        res.n_points = static_cast<int>(n);
        return res;
    }

    const auto pk = detect_peaks(t, y, min_peak_separation);
    if (pk.size() < 5)
        throw InsufficientPeaks("fit_decay_rate: fewer than 5 envelope peaks");
    std::vector<double> tp, yp;
    double ymin = 1e300;
    for (std::size_t i : pk) {
        tp.push_back(t[i]);
        yp.push_back(y[i]);
        ymin = std::min(ymin, y[i]);
    }
    const std::size_t n = tp.size();

    // A e^{-g t} + C : scan the floor C, log-linear inner fit, pick the C with
    // the smallest residual in the original (unlogged) variables.
    double best_res = 1e300, best_g = 0, best_se = 0, best_C = 0;
    const int nC = 400;
    for (int ic = 0; ic < nC; ++ic) {
        const double C = ymin * 0.999 * ic / (nC - 1);
        double st = 0, sz = 0;
        for (std::size_t i = 0; i < n; ++i) {
            st += tp[i];
            sz += std::log(yp[i] - C);
        }
        const double tb = st / n, zb = sz / n;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = std::log(yp[i] - C);
            sxx += (tp[i] - tb) * (tp[i] - tb);
            sxy += (tp[i] - tb) * (z - zb);
        }
        const double slope = sxy / sxx;
        double ssr = 0, ssr_log = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double zfit = zb + slope * (tp[i] - tb);
            const double r = std::exp(zfit) + C - yp[i];
            ssr += r * r;
            const double rl = std::log(yp[i] - C) - zfit;
            ssr_log += rl * rl;
        }
        if (ssr < best_res) {
            best_res = ssr;
            best_g = -slope;
            best_C = C;
            best_se = (n > 2) ? std::sqrt(ssr_log / (n - 2) / sxx) : 0.0;
        }
    }
    res.rate = std::abs(best_g);
    res.stderr_ = best_se;
    res.floor_ = best_C;
    res.n_points = static_cast<int>(n);
    return res;
}

std::string boundary_name(Boundary b) {
    return b == Boundary::open ? "open" : "periodic";
}

} // namespace pxp
