#pragma once

#include "qws/classical.hpp"
#include "qws/fock.hpp"
#include "qws/protocol.hpp"

namespace qws {

/// Rectangular phase-space grid, node-centered.
struct PhaseGrid {
    double x_min = -8.0, x_max = 8.0;
    double p_min = -8.0, p_max = 8.0;
    int nx = 512, np = 512;

    void validate() const {
        if (nx < 64 || np < 64)
            throw DomainError("PhaseGrid: counts must be >= 64");
        if (!(x_max > x_min) || !(p_max > p_min))
            throw DomainError("PhaseGrid: empty range");
    }
    double x(int i) const { return x_min + (x_max - x_min) * i / (nx - 1); }
    double p(int j) const { return p_min + (p_max - p_min) * j / (np - 1); }
    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dp() const { return (p_max - p_min) / (np - 1); }
};

/// Real phase-space field sampled on a grid (row i = x index, col j = p index).
struct WignerField {
    PhaseGrid grid;
    MatrixXd values;
    double hbar = 1.0;

    double integral() const { return values.sum() * grid.dx() * grid.dp(); }
    double max_abs() const { return values.cwiseAbs().maxCoeff(); }

    /// Checks normalization within 1e-4 (tail leakage shows up here).
    void validate() const {
        if (std::abs(integral() - 1.0) > 1e-4)
            throw ConsistencyError("WignerField: integral differs from 1 beyond 1e-4");
    }
};

/// Wigner function of the Fock state |n><n| without the 1/(2 pi hbar)
/// prefactor: F_n = 2 (-1)^n exp(-2|alpha|^2) L_n(4|alpha|^2) with
/// |alpha|^2 = (m omega x^2 + p^2/(m omega)) / (2 hbar).  Returns 0 and sets
/// *underflow when the Gaussian envelope is below double range.
double fock_wigner(int n, const PhasePoint& z, const DriveProtocol& p,
                   bool* underflow = nullptr);

/// Grid centered on the origin, rotation-closed in canonically scaled
/// coordinates, covering the state mean plus span_sigmas thermal widths.
PhaseGrid make_grid(const DriveProtocol& p, double mean_x, double mean_p,
                    int n = 512, double span_sigmas = 8.0);

/// Wigner transform of a truncated-basis state by closed-form number-basis
/// kernels (scaled generalized-Laguerre recurrences; grid points evaluated
/// in parallel).  Throws CoverageError when the grid misses the 6-sigma
/// neighborhood of the state.
WignerField wigner_transform(const DensityMatrix& rho, const PhaseGrid& grid,
                             const DriveProtocol& p);

/// Projective-measurement dephasing: zeroes off-diagonal elements in the
/// eigenbasis of h0.  Near-degenerate eigenvalue pairs (gap < 1e-10) raise
/// an ambiguity error unless the state leaves them unpopulated (< 1e-10).
DensityMatrix dephase(const DensityMatrix& rho, const FockOperator& h0);

/// Angular average (1/2pi) \oint P(r, theta') dtheta' in canonically scaled
/// coordinates, by polar resampling with bilinear interpolation.  The
/// result is theta-independent by construction.
WignerField angular_average(const WignerField& field, const DriveProtocol& p,
                            int n_angles = 256);

/// Mean and centered second moments of x and p for a truncated-basis state.
struct StateMoments {
    double mean_x, mean_p, var_x, var_p;
};
StateMoments state_moments(const DensityMatrix& rho, const DriveProtocol& p);

} // namespace qws
