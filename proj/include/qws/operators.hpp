#pragma once

#include <utility>

#include "qws/fock.hpp"
#include "qws/protocol.hpp"

namespace qws {

/// Annihilation/creation pair in an N-dimensional number basis.
/// The canonical commutator [a, a^dag] = 1 holds on the upper-left
/// (N-1) x (N-1) block; the corner row is truncated.
std::pair<FockOperator, FockOperator> build_ladder(int dim);

/// Position operator sqrt(hbar / 2 m omega) (a + a^dag).
FockOperator position_operator(const DriveProtocol& p, int dim);

/// Momentum operator i sqrt(m hbar omega / 2) (a^dag - a).
FockOperator momentum_operator(const DriveProtocol& p, int dim);

/// Dragged-well Hamiltonian H(t) = p^2/2m + (m omega^2/2)(x - u t)^2 as the
/// projection of the infinite-dimensional operator onto the truncated basis
/// (x^2, p^2 are squared before truncating).  t must lie in
/// [-pre_time, duration].
FockOperator build_hamiltonian(const DriveProtocol& p, double t, int dim);

/// Tridiagonal view of the dragged-well Hamiltonian at well center c:
/// H = diag(h0) - m omega^2 c x + (m omega^2 c^2 / 2).  Returns the
/// diagonal and the first subdiagonal.  Same matrix as build_hamiltonian
/// evaluated at c = u t.
struct HamiltonianBands {
    VectorXd diag;
    VectorXd off; // length dim-1
};
HamiltonianBands hamiltonian_bands(const DriveProtocol& p, double center, int dim);

/// Gibbs state of H(t), normalized in the truncated basis.  Throws
/// TruncationError when the top-tail population exceeds 1e-10.
DensityMatrix thermal_state(const DriveProtocol& p, double t, int dim);

/// Phase-space displacement operator exp[(i/hbar)(p0 x - x0 p)], built by
/// spectral exponentiation of the Hermitian generator.
FockOperator displacement_operator(const DriveProtocol& p, double x0, double p0, int dim);

/// State at the end of the first drive stage: the thermal state of H(0)
/// displaced to (coherent_center_x, coherent_center_p).  Carries quantum
/// coherence whenever pre_time is not a multiple of the period.
DensityMatrix displaced_thermal(const DriveProtocol& p, int dim);

/// Time-ordered propagator over [t0, t1] as an ordered product of
/// midpoint-rule slice exponentials exp(-i H(t_k) dt / hbar).  Slice
/// exponentials are applied to machine precision via a Chebyshev expansion
/// that exploits the tridiagonal structure of H(t).  Throws AccuracyError
/// if the result fails the unitarity gate (1e-8).
FockOperator propagator(const DriveProtocol& p, double t0, double t1, int steps, int dim);

/// Propagator of the reversed drive H^R(t) = H(tau - t) over [0, tau].
FockOperator reversed_propagator(const DriveProtocol& p, int steps, int dim);

/// Midpoint propagator for a general linearly moving well center
/// c(t) = c0 + cvel * t.  Shared backend of the two propagators above.
FockOperator propagate_linear_center(const DriveProtocol& p, double c0, double cvel,
                                     double t0, double t1, int steps, int dim);

/// Smallest basis dimension whose thermal/displaced-thermal tail population
/// stays below 1e-10 with margin, for the given protocol.
int choose_dimension(const DriveProtocol& p);

/// Eigen-decomposition of the banded Hamiltonian without materializing the
/// dense matrix.  Equivalent to spectrum(build_hamiltonian(...)).
Spectrum spectrum_banded(const HamiltonianBands& bands);

} // namespace qws
