#pragma once

#include <memory>
#include <vector>

#include "qws/classical.hpp"
#include "qws/workstats.hpp"

namespace qws {

/// Wigner-Kirkwood correction kernel of the exponential Weyl symbol:
/// f(i eta, z, t) = ((i eta)^2 / 8m) [Vxx - (i eta/3) Vx^2 - (i eta/3m) p^2 Vxx]
/// for the dragged quadratic well.
Complex wigner_kirkwood_f(double eta, const PhasePoint& z, double t,
                          const DriveProtocol& p);

/// How the hbar scan chooses basis dimension and slice counts per rung.
struct ScanPolicy {
    std::vector<double> hbar_ladder{0.8, 0.6, 0.45, 0.34, 0.25, 0.19};
    int fit_degree = 4;
    double dim_scale = 80.0; ///< N(hbar) = ceil(dim_scale / hbar)
    int dim_cap = 1200;
    int steps_base = 700;        ///< steps(hbar) = steps_base (href/hbar)^steps_exponent
    double steps_exponent = 0.5; ///< midpoint bias is rung-uniform at 0.5

    int dim_for(double hbar) const;
    int steps_for(double hbar, double hbar_ref) const;
    void validate(double hbar_ref) const;
};

/// Ordinary least squares polynomial fit, real and imaginary parts
/// independently.
struct PolyFit {
    VectorXcd coeffs;  ///< c_0 .. c_degree
    VectorXd stderrs;  ///< combined per-coefficient standard errors
    double residual = 0.0; ///< rms complex residual
};
PolyFit polyfit_complex(const std::vector<double>& xs, const VectorXcd& ys, int degree);

/// Extracted hbar-expansion of one characteristic-function value.
/// Phi(eta; hbar) = c0 + c1 hbar + c2 hbar^2 + ..., so the coefficients of
/// the (i hbar)-expansion are Phi0 = c0, Phi1 = c1 / i, Phi2 = -c2.
struct HbarScanResult {
    double eta = 0.0;
    WorkDef def = WorkDef::FCS;
    std::vector<double> hbars;
    VectorXcd phis;
    PolyFit fit;

    Complex phi0() const { return fit.coeffs[0]; }
    Complex phi1() const { return fit.coeffs[1] / Complex{0.0, 1.0}; }
    Complex phi2() const { return -fit.coeffs[2]; }
    double err(int order) const { return fit.stderrs[order]; }

    /// Residual gate: fit residual < 1e-2 |c0|; throws AccuracyError.
    void check_gate() const;
};

/// Exact truncated-basis characteristic functions along an hbar ladder.
/// Rungs (basis, propagator, eigendata) are built once and cached.
class ScanEngine {
public:
    ScanEngine(const DriveProtocol& base, ScanPolicy policy);

    int rung_count() const { return static_cast<int>(policy_.hbar_ladder.size()); }
    double rung_hbar(int j) const { return policy_.hbar_ladder[j]; }
    const SpectralContext& rung(int j);
    const ScanPolicy& policy() const { return policy_; }

    /// CF samples on one rung for a whole eta grid (parallel over eta).
    VectorXcd rung_cf(int j, WorkDef def, const VectorXd& etas);

    /// Scan + fit at a single eta value.
    HbarScanResult scan(double eta, WorkDef def);

    /// Scan + fit for every eta in the grid, one definition.
    std::vector<HbarScanResult> scan_grid(const VectorXd& etas, WorkDef def);

private:
    DriveProtocol base_;
    ScanPolicy policy_;
    std::vector<std::unique_ptr<SpectralContext>> rungs_;
};

/// Second-order comparison row for one eta value.
struct Phi2Row {
    double eta;
    Complex phi2_fcs;
    Complex phi2_mh;
    double err_fcs;
    double err_mh;
    double difference;   ///< |phi2_fcs - phi2_mh|
    double threshold;    ///< 3 x combined fit uncertainty
    bool significant;    ///< difference > threshold
};
std::vector<Phi2Row> phi2_compare(const VectorXd& etas, const DriveProtocol& p,
                                  const ScanPolicy& policy);

/// The five series of the headline figure: classical closed form, the scan
/// zeroth order, and zeroth + second order for FCS and MH at the protocol
/// hbar.
struct Fig1Table {
    VectorXd etas;
    VectorXcd classical;
    VectorXcd phi0;      ///< FCS-extracted zeroth order
    VectorXcd phi0_mh;   ///< MH-extracted zeroth order (agreement diagnostic)
    VectorXcd fcs_corrected;
    VectorXcd mh_corrected;
};
Fig1Table fig1_table(const DriveProtocol& p, const VectorXd& etas,
                     const ScanPolicy& policy);

} // namespace qws
