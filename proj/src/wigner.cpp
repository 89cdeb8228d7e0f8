#include "pxp/wigner.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pxp {

namespace {

constexpr double S3 = 1.7320508075688772; // sqrt(3)

// splitmix64: cheap counter-based stream seeding
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct SampleRng {
    std::uint64_t s0, s1;
    SampleRng(std::uint64_t seed, std::uint64_t index) {
        s0 = splitmix64(seed ^ (0x1234567887654321ULL + index));
        s1 = splitmix64(s0 + index);
        if (s0 == 0 && s1 == 0) s1 = 1;
    }
    std::uint64_t next() { // xorshift128+
        std::uint64_t x = s0;
        const std::uint64_t y = s1;
        s0 = y;
        x ^= x << 23;
        s1 = x ^ y ^ (x >> 17) ^ (y >> 26);
        return s1 + y;
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
};

} // namespace

void gauss_legendre(int n, double a, double b,
                    std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(n);
    weights.resize(n);
    // Newton iteration on P_n over (-1, 1), then affine map to (a, b).
    for (int i = 0; i < n / 2 + n % 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        nodes[i] = 0.5 * (b - a) * (-x) + 0.5 * (a + b); // ascending order
        weights[i] = 0.5 * (b - a) * w;
        nodes[n - 1 - i] = 0.5 * (b - a) * x + 0.5 * (a + b);
        weights[n - 1 - i] = weights[i];
    }
}

AnglePair theta_to_vartheta(const AnglePair& p) {
    if (std::abs(p.theta2 - M_PI) < 1e-12 && std::abs(p.theta1) > 1e-12)
        throw SingularPoint("theta_to_vartheta: (theta1 != 0, theta2 = pi) corner");
    auto map1 = [](double t1, double t2) {
        return 2.0 * std::atan2(std::sin(t1 / 2), std::cos(t1 / 2) * std::cos(t2 / 2));
    };
    return {map1(p.theta1, p.theta2), map1(p.theta2, p.theta1)};
}

AnglePair vartheta_to_theta(const AnglePair& p) {
    if (std::abs(p.theta1 - M_PI) < 1e-12 || std::abs(p.theta2 - M_PI) < 1e-12)
        throw SingularPoint("vartheta_to_theta: boundary corner");
    const double q1 = std::tan(p.theta1 / 2), q2 = std::tan(p.theta2 / 2);
    auto inv1 = [](double ta, double tb) {
        const double u = 1.0 + ta * ta - tb * tb;
        const double c2 = 2.0 / (u + std::sqrt(4.0 * tb * tb + u * u)); // cos^2(theta/2)
        const double cc = std::clamp(c2, 0.0, 1.0);
        return 2.0 * std::acos(std::sqrt(cc));
    };
    return {inv1(q1, q2), inv1(q2, q1)};
}

double wigner_unconstrained(const AnglePair& p) {
    return 0.25 * (1.0 - S3 * std::cos(p.theta1)) * (1.0 + S3 * std::cos(p.theta2));
}

double wigner_constrained(const AnglePair& p) {
    const double t1 = p.theta1, t2 = p.theta2;
    if (std::sin(t1) <= 0 || std::sin(t2) <= 0 || t1 <= 0 || t2 <= 0 || t1 >= M_PI || t2 >= M_PI)
        throw SingularPoint("wigner_constrained: boundary evaluation");
    const AnglePair v = theta_to_vartheta(p);
    const double c1h = std::cos(t1 / 2), c2h = std::cos(t2 / 2);
    const double s1h = std::sin(t1 / 2), s2h = std::sin(t2 / 2);
    const double tan1 = s1h / c1h, tan2 = s2h / c2h;
    const double num = 1.0 - s1h * s1h * s2h * s2h;
    const double den = (c1h * c1h + tan2 * tan2) * (c2h * c2h + tan1 * tan1) * c1h * c2h;
    const double jac = num / den;
    const double K = jac * std::sin(v.theta1) * std::sin(v.theta2) / (std::sin(t1) * std::sin(t2));
    return 0.25 * K * (1.0 - S3 * std::cos(v.theta1)) * (1.0 + S3 * std::cos(v.theta2));
}

namespace {

WignerGrid make_grid(int n1, int n2, bool constrained, GridKind kind, bool parallel) {
    if (n1 < 16 || n2 < 16) throw DomainError("wigner_grid: n1, n2 must be >= 16");
    WignerGrid g;
    g.n1 = n1;
    g.n2 = n2;
    g.kind = kind;
    g.constrained = constrained;
    if (kind == GridKind::gauss_legendre) {
        gauss_legendre(n1, 0.0, M_PI, g.nodes1, g.weights1);
        gauss_legendre(n2, 0.0, M_PI, g.nodes2, g.weights2);
    } else {
        // midpoint rule: uniform interior nodes
        g.nodes1.resize(n1);
        g.nodes2.resize(n2);
        g.weights1.assign(n1, M_PI / n1);
        g.weights2.assign(n2, M_PI / n2);
        for (int i = 0; i < n1; ++i) g.nodes1[i] = (i + 0.5) * M_PI / n1;
        for (int j = 0; j < n2; ++j) g.nodes2[j] = (j + 0.5) * M_PI / n2;
    }
    g.values.resize(n1, n2);
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            const AnglePair p{g.nodes1[i], g.nodes2[j]};
            g.values(i, j) = constrained ? wigner_constrained(p) : wigner_unconstrained(p);
        }
    }
    return g;
}

} // namespace

WignerGrid wigner_grid(int n1, int n2, bool constrained, GridKind kind) {
    return make_grid(n1, n2, constrained, kind, true);
}

WignerGrid wigner_grid_serial(int n1, int n2, bool constrained, GridKind kind) {
    return make_grid(n1, n2, constrained, kind, false);
}

double quadrature_norm(const WignerGrid& g) {
    double total = 0;
    for (int i = 0; i < g.n1; ++i) {
        double row = 0;
        for (int j = 0; j < g.n2; ++j)
            row += g.weights2[j] * std::sin(g.nodes2[j]) * g.values(i, j);
        total += g.weights1[i] * std::sin(g.nodes1[i]) * row;
    }
    return total;
}

PeakWidth peak_width(const WignerGrid& g) {
    // theta1 marginal of |W| (plain mean across theta2 nodes)
    std::vector<double> M(g.n1, 0.0);
    for (int i = 0; i < g.n1; ++i) {
        double s = 0;
        for (int j = 0; j < g.n2; ++j) s += std::abs(g.values(i, j));
        M[i] = s / g.n2;
    }
    int p = 0;
    for (int i = 1; i < g.n1; ++i)
        if (M[i] > M[p]) p = i;

    const double half = 0.5 * M[p];
    auto halfwidth = [&](int dir) -> double {
        int i = p;
        while (i + dir >= 0 && i + dir < g.n1 && M[i + dir] >= half) i += dir;
        if (i + dir < 0 || i + dir >= g.n1) return -1.0; // no crossing this side
        const double a = M[i], b = M[i + dir];
        const double x = g.nodes1[i] +
                         (g.nodes1[i + dir] - g.nodes1[i]) * (a - half) / (a - b);
        return std::abs(x - g.nodes1[p]);
    };
    const double wl = halfwidth(-1), wr = halfwidth(+1);
    double hwhm;
    if (wl >= 0 && wr >= 0)
        hwhm = 0.5 * (wl + wr);
    else
        hwhm = std::max(wl, wr); // boundary peak: one-sided width

    double msum = 0, var = 0;
    for (int i = 0; i < g.n1; ++i) {
        msum += M[i];
        const double d = g.nodes1[i] - g.nodes1[p];
        var += M[i] * d * d;
    }

    // full 2d argmax for the reported peak location
    int pi = 0, pj = 0;
    double best = -1;
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
            if (std::abs(g.values(i, j)) > best) {
                best = std::abs(g.values(i, j));
                pi = i;
                pj = j;
            }

    PeakWidth out;
    out.hwhm = hwhm;
    out.delta_theta0 = hwhm / std::sqrt(2.0 * std::log(2.0));
    out.moment_std = std::sqrt(var / msum);
    out.peak_raw = {g.nodes1[pi], g.nodes2[pj]};
    out.peak = {M_PI - g.nodes1[pi], M_PI - g.nodes2[pj]};
    return out;
}

namespace {

double abs_density(double t1, double t2, int* sign = nullptr) {
    const double w = wigner_constrained({t1, t2});
    if (sign) *sign = (w >= 0) ? +1 : -1;
    return std::abs(w) * std::sin(t1) * std::sin(t2);
}

// Envelope for rejection sampling: coarse-scan max of |W| sin sin, padded.
double sampling_envelope() {
    static double cached = -1;
    if (cached > 0) return cached;
    const int n = 400;
    double mx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double t1 = (i + 0.5) * M_PI / n, t2 = (j + 0.5) * M_PI / n;
            mx = std::max(mx, abs_density(t1, t2));
        }
    cached = 1.1 * mx;
    return cached;
}

} // namespace

std::vector<TWASample> twa_sample(std::uint64_t seed, std::size_t n) {
    const double env = sampling_envelope();
    std::vector<TWASample> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        SampleRng rng(seed, k);
        for (;;) {
            const double t1 = rng.uniform() * M_PI;
            const double t2 = rng.uniform() * M_PI;
            const double u = rng.uniform() * env;
            if (t1 <= 0 || t2 <= 0) continue;
            int sign;
            const double d = abs_density(t1, t2, &sign);
            if (d > env)
                throw EnvelopeTooSmall("twa_sample: density above envelope; re-estimate");
            if (u < d) {
                out[k] = TWASample{t1, t2, sign, d};
                break;
            }
        }
    }
    return out;
}

namespace {

TWASeries twa_series_impl(const std::vector<TWASample>& samples, const ModelParams& params,
                          const std::vector<double>& t_grid, bool parallel) {
    if (samples.empty()) throw DomainError("twa_observable_series: empty ensemble");
    if (t_grid.empty()) throw DomainError("twa_observable_series: empty time grid");
    const std::size_t n = samples.size();
    const std::size_t nt = t_grid.size();
    const double dt = 1e-2;

    // per-sample observable series; reduction later in fixed sample order
    std::vector<std::vector<double>> obs(n);
    std::vector<char> ok(n, 1);

#pragma omp parallel for schedule(static) if (parallel)
    for (long long kk = 0; kk < static_cast<long long>(n); ++kk) {
        const std::size_t k = static_cast<std::size_t>(kk);
        // sample coordinates -> flow angles (relabel + half-to-full angle)
        double th1 = (M_PI - samples[k].theta1) / 2.0;
        double th2 = (M_PI - samples[k].theta2) / 2.0;
        std::vector<double>& o = obs[k];
        o.assign(nt, 0.0);
        try {
            double t = 0;
            std::size_t idx = 0;
            auto record = [&](double time) {
                while (idx < nt && t_grid[idx] <= time + 1e-12) {
                    const double s = std::sin(th2);
                    o[idx++] = s * s;
                }
            };
            record(0.0);
            const double t_end = t_grid.back();
            while (t < t_end - 1e-12 && idx < nt) {
                const auto k1 = eom_rhs_l2(th1, th2, params.omega);
                const auto k2 = eom_rhs_l2(th1 + 0.5 * dt * k1[0], th2 + 0.5 * dt * k1[1], params.omega);
                const auto k3 = eom_rhs_l2(th1 + 0.5 * dt * k2[0], th2 + 0.5 * dt * k2[1], params.omega);
                const auto k4 = eom_rhs_l2(th1 + dt * k3[0], th2 + dt * k3[1], params.omega);
                th1 += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
                th2 += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
                t += dt;
                record(t);
            }
        } catch (const SingularCell&) {
            ok[k] = 0;
        }
    }

    TWASeries series;
    series.times = t_grid;
    series.mean.assign(nt, 0.0);
    series.stderr_.assign(nt, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        (ok[k] ? series.n_alive : series.n_dropped)++;
    if (series.n_alive == 0) throw SingularCell("twa_observable_series: all samples singular");

    double wsum = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (ok[k]) wsum += samples[k].weight;
    for (std::size_t j = 0; j < nt; ++j) {
        double num = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (ok[k]) num += samples[k].weight * obs[k][j];
        const double mean = num / wsum;
        double var = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (ok[k]) {
                const double r = samples[k].weight * (obs[k][j] - mean);
                var += r * r;
            }
        series.mean[j] = mean;
        series.stderr_[j] =
            std::sqrt(var / series.n_alive) / (std::abs(wsum) / series.n_alive) /
            std::sqrt(static_cast<double>(series.n_alive));
    }
    return series;
}

} // namespace

TWASeries twa_observable_series(const std::vector<TWASample>& samples,
                                const ModelParams& params,
                                const std::vector<double>& t_grid) {
    return twa_series_impl(samples, params, t_grid, true);
}

TWASeries twa_observable_series_serial(const std::vector<TWASample>& samples,
                                       const ModelParams& params,
                                       const std::vector<double>& t_grid) {
    return twa_series_impl(samples, params, t_grid, false);
}

} // namespace pxp
