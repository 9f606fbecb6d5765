#pragma once

#include <cstdint>

#include "qws/fock.hpp"
#include "qws/protocol.hpp"
#include "qws/workdef.hpp"

namespace qws {

/// A point z = (x, p) in phase space.
struct PhasePoint {
    double x = 0.0;
    double p = 0.0;
};

/// Normalized Gaussian phase-space density with diagonal covariance.
struct GaussianPhaseDensity {
    PhasePoint mean;
    double var_x = 1.0;
    double var_p = 1.0;

    double norm() const; ///< prefactor 1 / (2 pi sqrt(var_x var_p))
    double operator()(const PhasePoint& z) const;
};

/// One classical trajectory endpoint record for the work stage [0, tau].
struct ClassicalWorkSample {
    PhasePoint initial;
    PhasePoint final_point;
    double work = 0.0;
};

/// Classical Hamiltonian H(z, t) of the dragged well.
double classical_hamiltonian(const PhasePoint& z, double t, const DriveProtocol& p);

/// Exact Newton flow of the dragged well from time 0 to time t.
PhasePoint newton_map(const PhasePoint& z0, double t, const DriveProtocol& p);

/// Algebraic inverse of newton_map: recovers z(0) from z(t).
PhasePoint inverse_map(const PhasePoint& zt, double t, const DriveProtocol& p);

/// Exact flow for a general linearly moving well center c(t) = c0 + cvel t,
/// from time t0 to time t1.
PhasePoint flow_linear_center(const PhasePoint& z, double c0, double cvel,
                              double t0, double t1, const DriveProtocol& p);

/// Work of the stage [0, tau] for the trajectory starting at z0, from exact
/// endpoint energies (equals the integral of dH/dt for isolated dynamics).
ClassicalWorkSample classical_work(const PhasePoint& z0, const DriveProtocol& p);

/// Independent route: composite Gauss-Legendre quadrature of
/// int_0^tau dt (dH/dt)(z(t), t) along the exact trajectory.
double classical_work_quadrature(const PhasePoint& z0, const DriveProtocol& p,
                                 int panels = 64);

/// Classical counterpart of the post-first-stage state: Gaussian with mean
/// (coherent_center_x, coherent_center_p) and thermal variances
/// 1/(beta m omega^2), m/beta.
GaussianPhaseDensity classical_initial_density(const DriveProtocol& p);

/// Closed-form classical characteristic function of work,
/// Phi(eta) = exp{ m u^2 [ i eta (cos w tau' - cos w(tau'+tau))
///                         - (eta^2/beta)(1 - cos w tau) ] }.
Complex cf_classical_closed(double eta, const DriveProtocol& p);
VectorXcd cf_classical_closed(const VectorXd& etas, const DriveProtocol& p);

/// Monte Carlo estimate of the classical characteristic function together
/// with per-eta standard errors of the real and imaginary parts.
/// Deterministic for a fixed seed, independent of thread count.
struct McCf {
    VectorXd etas;
    VectorXcd values;
    VectorXd stderr_re;
    VectorXd stderr_im;
};
McCf cf_classical_mc(const VectorXd& etas, const DriveProtocol& p,
                     std::int64_t n_samples, std::uint64_t seed);

/// Sample mean / variance of the classical work, with standard errors.
struct WorkStats {
    double mean = 0.0;
    double var = 0.0;
    double mean_stderr = 0.0;
    double var_stderr = 0.0;
};
WorkStats classical_work_stats(const DriveProtocol& p, std::int64_t n_samples,
                               std::uint64_t seed);

/// Classical generalized Jarzynski check for the coherent-counterpart
/// initial density: Monte Carlo <exp(-beta(W - dF))> against the closed-form
/// Gaussian integral of the reversed-process density.  Callers should treat
/// lhs_stderr / lhs > 0.1 as a sample-size warning.
JarzynskiReport gong_jarzynski_check(const DriveProtocol& p, std::int64_t n_samples,
                                     std::uint64_t seed);

} // namespace qws
