#include "qws/semiclassical.hpp"

#include <algorithm>
#include <cmath>

#include "qws/operators.hpp"

namespace qws {

Complex wigner_kirkwood_f(double eta, const PhasePoint& z, double t,
                          const DriveProtocol& p) {
    p.validate();
    const Complex ie{0.0, eta};
    const double vx = p.mass * p.omega * p.omega * (z.x - p.center(t));
    const double vxx = p.mass * p.omega * p.omega;
    return ie * ie / (8.0 * p.mass) *
           (vxx - ie / 3.0 * vx * vx - ie / (3.0 * p.mass) * z.p * z.p * vxx);
}

int ScanPolicy::dim_for(double hbar) const {
    return std::min(dim_cap, static_cast<int>(std::ceil(dim_scale / hbar)));
}

int ScanPolicy::steps_for(double hbar, double hbar_ref) const {
    return static_cast<int>(
        std::ceil(steps_base * std::pow(hbar_ref / hbar, steps_exponent)));
}

void ScanPolicy::validate(double hbar_ref) const {
    if (hbar_ladder.size() < 4)
        throw DomainError("ScanPolicy: ladder needs >= 4 hbar values");
    for (size_t i = 0; i < hbar_ladder.size(); ++i) {
        if (!(hbar_ladder[i] > 0.0) || hbar_ladder[i] > hbar_ref)
            throw DomainError("ScanPolicy: ladder values must lie in (0, hbar_ref]");
        if (i > 0 && hbar_ladder[i] >= hbar_ladder[i - 1])
            throw DomainError("ScanPolicy: ladder must be strictly descending");
    }
    if (fit_degree < 3)
        throw DomainError("ScanPolicy: fit degree must be >= 3");
    if (static_cast<int>(hbar_ladder.size()) < fit_degree + 2)
        throw DomainError("ScanPolicy: need at least degree + 2 ladder points");
    if (steps_base < 1 || dim_scale <= 0.0)
        throw DomainError("ScanPolicy: bad steps or dimension policy");
}

PolyFit polyfit_complex(const std::vector<double>& xs, const VectorXcd& ys, int degree) {
    const int n = static_cast<int>(xs.size());
    const int p = degree + 1;
    if (n != ys.size() || n < p + 1)
        throw DomainError("polyfit_complex: need more samples than coefficients");
    MatrixXd vand(n, p);
    for (int i = 0; i < n; ++i) {
        double pw = 1.0;
        for (int j = 0; j < p; ++j) {
            vand(i, j) = pw;
            pw *= xs[i];
        }
    }
    const Eigen::ColPivHouseholderQR<MatrixXd> qr(vand);
    const VectorXd cre = qr.solve(ys.real());
    const VectorXd cim = qr.solve(ys.imag());

    const VectorXd rre = ys.real() - vand * cre;
    const VectorXd rim = ys.imag() - vand * cim;
    const int dof = n - p;
    const double s2re = rre.squaredNorm() / dof;
    const double s2im = rim.squaredNorm() / dof;
    const MatrixXd xtx_inv = (vand.transpose() * vand).inverse();

    PolyFit fit;
    fit.coeffs.resize(p);
    fit.stderrs.resize(p);
    for (int j = 0; j < p; ++j) {
        fit.coeffs[j] = Complex{cre[j], cim[j]};
        fit.stderrs[j] = std::sqrt((s2re + s2im) * xtx_inv(j, j));
    }
    fit.residual = std::sqrt((rre.squaredNorm() + rim.squaredNorm()) / n);
    return fit;
}

void HbarScanResult::check_gate() const {
    const double scale = std::abs(fit.coeffs[0]);
    if (fit.residual >= 1e-2 * scale)
        throw AccuracyError("hbar scan invalid: fit residual " +
                            std::to_string(fit.residual) + " vs zeroth order " +
                            std::to_string(scale) + " at eta " + std::to_string(eta));
}

ScanEngine::ScanEngine(const DriveProtocol& base, ScanPolicy policy)
    : base_(base), policy_(std::move(policy)) {
    base_.validate();
    policy_.validate(base_.hbar);
    rungs_.resize(policy_.hbar_ladder.size());
}

const SpectralContext& ScanEngine::rung(int j) {
    if (!rungs_[j]) {
        DriveProtocol pj = base_;
        pj.hbar = policy_.hbar_ladder[j];
        const int dim = policy_.dim_for(pj.hbar);
        const int steps = policy_.steps_for(pj.hbar, base_.hbar);
        const DensityMatrix rho0 = displaced_thermal(pj, dim);
        const Spectrum s0 = spectrum_banded(hamiltonian_bands(pj, 0.0, dim));
        const Spectrum st =
            spectrum_banded(hamiltonian_bands(pj, pj.center(pj.duration), dim));
        const FockOperator u = propagator(pj, 0.0, pj.duration, steps, dim);
        rungs_[j] = std::make_unique<SpectralContext>(
            SpectralContext::build(rho0, s0, st, u));
    }
    return *rungs_[j];
}

VectorXcd ScanEngine::rung_cf(int j, WorkDef def, const VectorXd& etas) {
    return characteristic_function(rung(j), def, etas).values;
}

HbarScanResult ScanEngine::scan(double eta, WorkDef def) {
    VectorXd grid(1);
    grid[0] = eta;
    auto rows = scan_grid(grid, def);
    return rows.front();
}

std::vector<HbarScanResult> ScanEngine::scan_grid(const VectorXd& etas, WorkDef def) {
    const int nr = rung_count();
    MatrixXcd phis(nr, etas.size());
    for (int j = 0; j < nr; ++j)
        phis.row(j) = rung_cf(j, def, etas).transpose();

    std::vector<HbarScanResult> out;
    out.reserve(etas.size());
    for (Eigen::Index e = 0; e < etas.size(); ++e) {
        HbarScanResult r;
        r.eta = etas[e];
        r.def = def;
        r.hbars = policy_.hbar_ladder;
        r.phis = phis.col(e);
        r.fit = polyfit_complex(r.hbars, r.phis, policy_.fit_degree);
        r.check_gate();
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Phi2Row> phi2_compare(const VectorXd& etas, const DriveProtocol& p,
                                  const ScanPolicy& policy) {
    ScanEngine engine(p, policy);
    const auto fcs = engine.scan_grid(etas, WorkDef::FCS);
    const auto mh = engine.scan_grid(etas, WorkDef::MH);
    std::vector<Phi2Row> rows;
    rows.reserve(etas.size());
    for (Eigen::Index e = 0; e < etas.size(); ++e) {
        Phi2Row row;
        row.eta = etas[e];
        row.phi2_fcs = fcs[e].phi2();
        row.phi2_mh = mh[e].phi2();
        row.err_fcs = fcs[e].err(2);
        row.err_mh = mh[e].err(2);
        row.difference = std::abs(row.phi2_fcs - row.phi2_mh);
        row.threshold = 3.0 * std::hypot(row.err_fcs, row.err_mh);
        row.significant = row.difference > row.threshold;
        rows.push_back(row);
    }
    return rows;
}

Fig1Table fig1_table(const DriveProtocol& p, const VectorXd& etas,
                     const ScanPolicy& policy) {
    ScanEngine engine(p, policy);
    const auto fcs = engine.scan_grid(etas, WorkDef::FCS);
    const auto mh = engine.scan_grid(etas, WorkDef::MH);
    const double h2 = p.hbar * p.hbar;

    Fig1Table t;
    t.etas = etas;
    t.classical = cf_classical_closed(etas, p);
    t.phi0.resize(etas.size());
    t.phi0_mh.resize(etas.size());
    t.fcs_corrected.resize(etas.size());
    t.mh_corrected.resize(etas.size());
    for (Eigen::Index e = 0; e < etas.size(); ++e) {
        t.phi0[e] = fcs[e].phi0();
        t.phi0_mh[e] = mh[e].phi0();
        // Phi0 + (i hbar)^2 Phi2 = c0 + c2 hbar^2
        t.fcs_corrected[e] = fcs[e].fit.coeffs[0] + fcs[e].fit.coeffs[2] * h2;
        t.mh_corrected[e] = mh[e].fit.coeffs[0] + mh[e].fit.coeffs[2] * h2;
    }
    return t;
}

} // namespace qws
