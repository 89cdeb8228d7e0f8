// Timings for the OpenMP kernels against their serial reference twins:
// Hamiltonian apply, Wigner grid evaluation, TWA ensemble propagation, and
// the Lyapunov L-sweep.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <omp.h>

#include "pxp/lyapunov.hpp"
#include "pxp/quantum.hpp"
#include "pxp/wigner.hpp"

namespace {

template <typename F>
double time_ms(F&& f, int reps = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-24s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main() {
    std::printf("threads available: %d\n\n", omp_get_max_threads());

    {
        const auto basis = pxp::build_basis(24);
        pxp::StateVector x(basis.dim()), y;
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = pxp::cplx(std::cos(0.1 * i), std::sin(0.1 * i));
        basis.adj_offsets(); // build adjacency outside the timed region
        const double ts = time_ms([&] { pxp::hamiltonian_apply_serial(basis, x, y, 1.0); }, 20);
        const double tp = time_ms([&] { pxp::hamiltonian_apply(basis, x, y, 1.0); }, 20);
        report("hamiltonian_apply N=24", ts, tp);
    }
    {
        const double ts = time_ms([&] { pxp::wigner_grid_serial(400, 400, true); }, 3);
        const double tp = time_ms([&] { pxp::wigner_grid(400, 400, true); }, 3);
        report("wigner_grid 400x400", ts, tp);
    }
    {
        const auto samples = pxp::twa_sample(12345, 200);
        pxp::ModelParams p;
        p.L = 2;
        std::vector<double> t_grid(41);
        std::iota(t_grid.begin(), t_grid.end(), 0.0);
        const double ts =
            time_ms([&] { pxp::twa_observable_series_serial(samples, p, t_grid); });
        const double tp = time_ms([&] { pxp::twa_observable_series(samples, p, t_grid); });
        report("twa_series 200x40", ts, tp);
    }
    {
        const std::vector<int> Ls = {2, 4, 6, 8, 10, 12};
        const double w = 0.651809871465933; // revival frequency of the Z2 orbit
        const double ts = time_ms([&] { pxp::spectra_sweep_serial(Ls, w, 2000); });
        const double tp = time_ms([&] { pxp::spectra_sweep(Ls, w, 2000); });
        report("lyapunov sweep L<=12", ts, tp);
    }
    return 0;
}
