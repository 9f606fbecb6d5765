#pragma once

#include "qws/fock.hpp"
#include "qws/operators.hpp"
#include "qws/protocol.hpp"

namespace qws::ref {

/// Serial reference propagator: the same midpoint slice product as
/// qws::propagator, but each slice exponential is taken by dense spectral
/// decomposition.  O(steps * N^3); for tests and benchmarks.
FockOperator propagator_spectral(const DriveProtocol& p, double t0, double t1,
                                 int steps, int dim);

/// Serial reference characteristic function: the literal triple sum
/// sum_{m,n,k} over both eigenbases at each eta.  O(N^3) per eta point;
/// for tests and benchmarks.  `def` is 0 = TPM, 1 = FCS, 2 = MH.
VectorXcd cf_triple_sum(const DensityMatrix& rho0, const FockOperator& h0,
                        const FockOperator& ht, const FockOperator& u,
                        const VectorXd& etas, int def);

/// Brute-force Wigner value at one phase-space point from the position-space
/// integral (1/2 pi hbar) int dy e^{-i p y / hbar} <x+y/2| rho |x-y/2> with
/// Hermite-function wavefunctions.  Slow; pins the kernel conventions.
double wigner_point_quadrature(const DensityMatrix& rho, double x, double p,
                               const DriveProtocol& proto);

} // namespace qws::ref
