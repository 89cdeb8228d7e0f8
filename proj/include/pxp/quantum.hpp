#pragma once
#include <complex>
#include <cstdint>
#include <string>
#include <vector>
#include "pxp/errors.hpp"

// Exact quantum dynamics of the PXP chain in the blockade-constrained basis:
// basis enumeration, sparse Hamiltonian action, Krylov/RK4 propagation,
// observables, and the variational-state amplitudes for cross-validation.

namespace pxp {

using cplx = std::complex<double>;

enum class Boundary { open, periodic };

struct ConstrainedBasis {
    int n_sites = 0;
    Boundary boundary = Boundary::open;
    std::vector<std::uint32_t> configs; // sorted ascending; no adjacent excitations

    // Index of a config (binary search); -1 if absent.
    long index_of(std::uint32_t c) const;
    std::size_t dim() const { return configs.size(); }

    // Lazily built sparsity pattern of H (uniform entries omega/2): row i
    // couples to configs adj_targets[adj_offsets[i] .. adj_offsets[i+1]).
    const std::vector<std::size_t>& adj_offsets() const;
    const std::vector<std::uint32_t>& adj_targets() const;

  private:
    mutable std::vector<std::size_t> offsets_;
    mutable std::vector<std::uint32_t> targets_;
    void build_adjacency() const;
};

using StateVector = std::vector<cplx>;

enum class SeriesKind { rydberg_density, entropy, echo };
enum class EvolveMethod { krylov, rk4 };
enum class FitKind { exp_envelope, linear };

struct ObservableSeries {
    std::vector<double> times;
    std::vector<double> values;
    SeriesKind kind = SeriesKind::rydberg_density;
};

struct FitResult {
    double rate = 0;   // magnitude of the decay rate / slope
    double stderr_ = 0;
    double floor_ = 0; // fitted additive offset (exp_envelope only)
    int n_points = 0;  // peaks (exp_envelope) or samples (linear) used
};

ConstrainedBasis build_basis(int n_sites, Boundary boundary = Boundary::open,
                             std::size_t max_dim = 2000000);

// y = H x with H = (omega/2) sum_i P_{i-1} sx_i P_{i+1} (end sites use the
// single existing neighbor projector for open boundaries). Scatter-free:
// every output entry is accumulated by exactly one worker.
void hamiltonian_apply(const ConstrainedBasis& basis, const StateVector& x,
                       StateVector& y, double omega);
void hamiltonian_apply_serial(const ConstrainedBasis& basis, const StateVector& x,
                              StateVector& y, double omega);

// Propagates state0 and returns the states at the requested times
// (t_grid ascending, starting at >= 0). dt is the internal step bound.
std::vector<StateVector> evolve(const ConstrainedBasis& basis, const StateVector& state0,
                                const std::vector<double>& t_grid, double dt,
                                EvolveMethod method, double omega = 1.0);

double rydberg_density(const ConstrainedBasis& basis, const StateVector& state, int site);

// Half-chain (or arbitrary-cut) von Neumann entropy in nats.
double entanglement_entropy(const ConstrainedBasis& basis, const StateVector& state, int cut);

double loschmidt_echo(const StateVector& state_t, const StateVector& state_0);

// |Z2> = |g r g r ...> : odd sites (0-based) excited.
StateVector z2_state(const ConstrainedBasis& basis);

// Amplitudes of the chi=2 variational state over the constrained basis
// (matrices tiled from thetas/phis of length N), normalized.
StateVector mps_state_vector(const std::vector<double>& thetas,
                             const std::vector<double>& phis,
                             const ConstrainedBasis& basis);

// exp_envelope: local maxima above the series median with the given minimum
// separation, then least-squares A e^{-g t} + C over the peaks (C >= 0 chosen
// by a grid search with a log-linear inner fit). linear: ordinary least
// squares on the raw series.
FitResult fit_decay_rate(const ObservableSeries& series, FitKind kind,
                         double min_peak_separation = 0.0);

std::string boundary_name(Boundary b);

} // namespace pxp
