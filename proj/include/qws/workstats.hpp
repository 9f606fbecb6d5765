#pragma once

#include <vector>

#include "qws/fock.hpp"
#include "qws/operators.hpp"
#include "qws/protocol.hpp"
#include "qws/workdef.hpp"

namespace qws {

/// Uniform grid of eta (counting-field) values.
VectorXd make_eta_grid(double eta_min, double eta_max, int count);

/// Complex characteristic-function samples Phi(eta) for one work definition.
struct CharacteristicSamples {
    WorkDef def = WorkDef::TPM;
    VectorXd etas;
    VectorXcd values;

    /// Checks Phi(0) = 1 within 1e-10 and conjugate symmetry
    /// Phi(-eta) = conj Phi(eta) wherever both grid points exist.
    void validate() const;
};

/// Real weights on a discrete work support; negative weights are
/// legitimate for FCS/MH with initial coherence.
struct WorkQuasiDistribution {
    WorkDef def = WorkDef::TPM;
    std::vector<double> support; ///< ascending work values
    std::vector<double> weights;
    double merge_tol = 0.0;
    double max_imag_residual = 0.0; ///< largest imaginary part discarded

    void validate() const;
    VectorXcd resum(const VectorXd& etas) const; ///< sum_j w_j e^{i eta W_j}
    double exp_average(double beta, double delta_f) const;
    double min_weight() const;
    int negativity_count() const;
    double weight_sum() const;
};

/// Shared spectral data for the three characteristic functions: eigenbases
/// of H(0) and H(tau), the transition matrix W = V_tau^dag U V_0 and the
/// initial state in the H(0) eigenbasis.
struct SpectralContext {
    VectorXd e0;   ///< eigenvalues of H(0), ascending
    VectorXd et;   ///< eigenvalues of H(tau), ascending
    MatrixXcd v0;  ///< eigenvectors of H(0)
    MatrixXcd vt;  ///< eigenvectors of H(tau)
    MatrixXcd w;   ///< V_tau^dag U V_0
    MatrixXd w2;   ///< |W_mn|^2
    MatrixXcd rho; ///< V_0^dag rho(0) V_0

    int dim() const { return static_cast<int>(e0.size()); }

    static SpectralContext build(const DensityMatrix& rho0, const FockOperator& h0,
                                 const FockOperator& ht, const FockOperator& u);

    /// Same contract with precomputed eigen-decompositions of H(0), H(tau).
    static SpectralContext build(const DensityMatrix& rho0, const Spectrum& s0,
                                 const Spectrum& st, const FockOperator& u);
};

/// Characteristic function for one definition on an eta grid, evaluated in
/// the spectral bases (one pass of precomputed eigendata, no per-eta matrix
/// exponentials).  Eta points are evaluated in parallel.
CharacteristicSamples characteristic_function(const SpectralContext& ctx, WorkDef def,
                                              const VectorXd& etas);

/// Eq.-style entry points.  For TPM the state is first dephased in the
/// H(0) eigenbasis (the first projective measurement); for commuting states
/// this coincides with the plain trace formula.
CharacteristicSamples cf_tpm(const DensityMatrix& rho0, const FockOperator& h0,
                             const FockOperator& ht, const FockOperator& u,
                             const VectorXd& etas);
CharacteristicSamples cf_fcs(const DensityMatrix& rho0, const FockOperator& h0,
                             const FockOperator& ht, const FockOperator& u,
                             const VectorXd& etas);
CharacteristicSamples cf_mh(const DensityMatrix& rho0, const FockOperator& h0,
                            const FockOperator& ht, const FockOperator& u,
                            const VectorXd& etas);

/// Default support-merge tolerance: 1e-6 of the level spacing.
double default_merge_tol(const DriveProtocol& p);

/// Work quasi-distribution on the discrete spectral support.
/// TPM:  W = Et_m - E0_n, weight p_n |W_mn|^2.
/// MH:   W = Et_m - E0_n, weight Re <n|rho U^dag|m><m|U|n>.
/// FCS:  W = Et_m - (E0_n + E0_k)/2, weights accumulated over (n, k) pairs.
/// Support values closer than merge_tol are merged; weights below 1e-14 in
/// magnitude are dropped after merging.
WorkQuasiDistribution quasi_distribution(const SpectralContext& ctx, WorkDef def,
                                         double merge_tol);
WorkQuasiDistribution quasi_distribution(const DensityMatrix& rho0, const FockOperator& h0,
                                         const FockOperator& ht, const FockOperator& u,
                                         WorkDef def, double merge_tol);

/// First moments <W^j>, j = 1..max_order (<= 4), by analytic summation over
/// the spectral triple sums.
std::vector<double> work_moments(const SpectralContext& ctx, WorkDef def, int max_order);

/// Final state of the time-reversed process: evolve the equilibrium state of
/// H(tau) under H^R(t) = H(tau - t) for tau, then apply the anti-unitary
/// time reversal (complex conjugation in the number basis).
DensityMatrix reverse_final_state(const DriveProtocol& p, int steps, int dim);

/// Generalized Jarzynski check for one work definition: the quasi-
/// distribution average of exp(-beta (W - dF)) against the reversed-process
/// expression evaluated in the H(0) eigenbasis by an independent code path.
JarzynskiReport jarzynski_check(const DensityMatrix& rho0, const DriveProtocol& p,
                                WorkDef def, int steps, int dim);

} // namespace qws
