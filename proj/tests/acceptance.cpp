// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Criteria marked "runtime" also enforce their wall-clock budget.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "qws/cli.hpp"
#include "qws/classical.hpp"
#include "qws/operators.hpp"
#include "qws/semiclassical.hpp"
#include "qws/wigner.hpp"
#include "qws/workstats.hpp"

using namespace qws;

namespace {

bool g_all_ok = true;

void report(int num, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", num, name.c_str(),
                detail.empty() ? "" : " | ", detail.c_str());
    std::fflush(stdout);
    g_all_ok = g_all_ok && ok;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct QuantumPack {
    DensityMatrix rho0;
    FockOperator h0, ht, u;
    SpectralContext ctx;
};

QuantumPack pack(const DriveProtocol& p, int dim, int steps) {
    DensityMatrix rho0 = displaced_thermal(p, dim);
    FockOperator h0 = build_hamiltonian(p, 0.0, dim);
    FockOperator ht = build_hamiltonian(p, p.duration, dim);
    FockOperator u = propagator(p, 0.0, p.duration, steps, dim);
    SpectralContext ctx = SpectralContext::build(rho0, h0, ht, u);
    return {std::move(rho0), std::move(h0), std::move(ht), std::move(u), std::move(ctx)};
}

// exact evaluation of the closed-form classical CF at the headline
// parameters, eta = 1 (frozen from high-precision arithmetic)
constexpr double kClassicalRe1 = 0.0098248939520676947;
constexpr double kClassicalIm1 = 0.24244818837519795;

} // namespace

int main() {
    const double t_total = omp_get_wtime();
    DriveProtocol fig1; // beta = u = m = omega = hbar = 1, tau' = 1, tau = 2
    DriveProtocol nocoh = fig1;
    nocoh.pre_time = 0.0;

    // ---- criterion 1: classical closed form and Monte Carlo agreement ----
    {
        const double t0 = omp_get_wtime();
        const Complex v1 = cf_classical_closed(1.0, fig1);
        const bool point_ok = std::abs(v1.real() - kClassicalRe1) < 1e-5 &&
                              std::abs(v1.imag() - kClassicalIm1) < 1e-5;
        const VectorXd etas = make_eta_grid(-4.0, 4.0, 161);
        const VectorXcd closed = cf_classical_closed(etas, fig1);
        const McCf mc = cf_classical_mc(etas, fig1, 1000000, 20240809);
        int misses = 0;
        for (int i = 0; i < 161; ++i) {
            if (std::abs(mc.values[i].real() - closed[i].real()) >
                3.0 * mc.stderr_re[i] + 1e-12)
                ++misses;
            if (std::abs(mc.values[i].imag() - closed[i].imag()) >
                3.0 * mc.stderr_im[i] + 1e-12)
                ++misses;
        }
        const double dt = omp_get_wtime() - t0;
        report(1, "classical closed form + Monte Carlo",
               point_ok && misses == 0 && dt < 60.0,
               "eta=1 dev (" + fmt(std::abs(v1.real() - kClassicalRe1)) + ", " +
                   fmt(std::abs(v1.imag() - kClassicalIm1)) + "), 3-sigma misses " +
                   std::to_string(misses) + "/322, runtime " + fmt(dt) + "s");
    }

    // ---- criteria 2+3: quantum-classical correspondence of the scan ----
    ScanPolicy policy; // spec defaults
    ScanEngine engine(fig1, policy);
    {
        const double t0 = omp_get_wtime();
        bool zeroth_ok = true, odd_ok = true;
        std::string det2, det3;
        for (double eta : {0.25, 0.5, 1.0}) {
            const Complex cl = cf_classical_closed(eta, fig1);
            for (WorkDef def : {WorkDef::FCS, WorkDef::MH}) {
                const HbarScanResult r = engine.scan(eta, def);
                const double rel = std::abs(r.phi0() - cl) / std::abs(cl);
                const double odd = std::abs(r.phi1()) / std::abs(r.phi0());
                zeroth_ok = zeroth_ok && rel < 1e-3;
                odd_ok = odd_ok && odd < 1e-3;
                if (eta == 1.0) {
                    const std::string tag = def == WorkDef::FCS ? "FCS" : "MH";
                    det2 += tag + " rel " + fmt(rel) + " ";
                    det3 += tag + " |Phi1|/|Phi0| " + fmt(odd) + " ";
                }
            }
        }
        const double dt = omp_get_wtime() - t0;
        report(2, "hbar-scan zeroth order matches the classical CF",
               zeroth_ok && dt < 600.0, det2 + "runtime " + fmt(dt) + "s");
        report(3, "first-order hbar coefficient vanishes", odd_ok, det3);
    }

    // ---- criterion 4: second-order FCS/MH split with coherence ----
    {
        VectorXd etas(7);
        etas << 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0;
        const auto fcs = engine.scan_grid(etas, WorkDef::FCS);
        const auto mh = engine.scan_grid(etas, WorkDef::MH);
        int significant = 0;
        double best = 0.0;
        for (int i = 0; i < 7; ++i) {
            const double diff = std::abs(fcs[i].phi2() - mh[i].phi2());
            const double thresh = 3.0 * std::hypot(fcs[i].err(2), mh[i].err(2));
            if (diff > thresh) {
                ++significant;
                best = std::max(best, diff / std::max(thresh, 1e-300));
            }
        }
        ScanEngine engine0(nocoh, policy);
        const auto fcs0 = engine0.scan_grid(etas, WorkDef::FCS);
        const auto mh0 = engine0.scan_grid(etas, WorkDef::MH);
        int spurious = 0;
        for (int i = 0; i < 7; ++i) {
            const double diff = std::abs(fcs0[i].phi2() - mh0[i].phi2());
            const double thresh = 3.0 * std::hypot(fcs0[i].err(2), mh0[i].err(2));
            if (diff > thresh)
                ++spurious;
        }
        report(4, "second-order split appears only with coherence",
               significant >= 1 && spurious == 0,
               "significant points " + std::to_string(significant) + "/7 (max ratio " +
                   fmt(best) + "), tau'=0 spurious " + std::to_string(spurious));
    }

    // ---- criterion 5: definition equivalence without coherence ----
    {
        const QuantumPack q = pack(nocoh, 80, 4000);
        const VectorXd etas = make_eta_grid(-4.0, 4.0, 161);
        const VectorXcd tpm = characteristic_function(q.ctx, WorkDef::TPM, etas).values;
        const VectorXcd fcs = characteristic_function(q.ctx, WorkDef::FCS, etas).values;
        const VectorXcd mh = characteristic_function(q.ctx, WorkDef::MH, etas).values;
        const double dev = std::max((tpm - fcs).cwiseAbs().maxCoeff(),
                                    std::max((tpm - mh).cwiseAbs().maxCoeff(),
                                             (fcs - mh).cwiseAbs().maxCoeff()));
        report(5, "coherence-free definitions coincide", dev < 1e-10,
               "max pointwise deviation " + fmt(dev));
    }

    // ---- criteria 6-8 share the coherent N = 80 pack ----
    const QuantumPack q80 = pack(fig1, 80, 4000);

    // ---- criterion 6: moment identities ----
    {
        const auto mf = work_moments(q80.ctx, WorkDef::FCS, 2);
        const auto mm = work_moments(q80.ctx, WorkDef::MH, 2);
        const MatrixXcd rho_t = q80.u.mat * q80.rho0.mat * q80.u.mat.adjoint();
        const double de = (rho_t * q80.ht.mat).trace().real() -
                          (q80.rho0.mat * q80.h0.mat).trace().real();
        const bool quantum_ok = std::abs(mf[0] - mm[0]) < 1e-8 &&
                                std::abs(mf[1] - mm[1]) < 1e-8 &&
                                std::abs(mf[0] - de) < 1e-8;

        // classical mean and variance from derivatives of the closed form
        const double h = 5e-3;
        Complex d[5];
        for (int k = -2; k <= 2; ++k)
            d[k + 2] = cf_classical_closed(k * h, fig1);
        const Complex d1 = (d[0] - 8.0 * d[1] + 8.0 * d[3] - d[4]) / (12.0 * h);
        const Complex d2 =
            (-d[0] + 16.0 * d[1] - 30.0 * d[2] + 16.0 * d[3] - d[4]) / (12.0 * h * h);
        const double mean = d1.imag();
        const double var = -d2.real() - mean * mean;
        const double mean_target = std::cos(1.0) - std::cos(3.0);
        const double var_target = 2.0 * (1.0 - std::cos(2.0));
        const bool classical_ok =
            std::abs(mean - mean_target) < 1e-8 && std::abs(var - var_target) < 1e-8;
        report(6, "moment identities", quantum_ok && classical_ok,
               "FCS-MH m1 dev " + fmt(std::abs(mf[0] - mm[0])) + ", m2 dev " +
                   fmt(std::abs(mf[1] - mm[1])) + ", <W> dev " +
                   fmt(std::abs(mf[0] - de)) + ", classical mean/var devs " +
                   fmt(std::abs(mean - mean_target)) + "/" +
                   fmt(std::abs(var - var_target)));
    }

    // ---- criterion 7: quasi-distribution integrity ----
    {
        const VectorXd etas = make_eta_grid(-4.0, 4.0, 41);
        bool ok = true;
        std::string det;
        for (WorkDef def : {WorkDef::TPM, WorkDef::FCS, WorkDef::MH}) {
            const WorkQuasiDistribution dist =
                quasi_distribution(q80.ctx, def, default_merge_tol(fig1));
            const double sum_dev = std::abs(dist.weight_sum() - 1.0);
            const VectorXcd direct = characteristic_function(q80.ctx, def, etas).values;
            const double resum_dev = (dist.resum(etas) - direct).cwiseAbs().maxCoeff();
            ok = ok && sum_dev < 1e-10 && dist.max_imag_residual < 1e-10 &&
                 resum_dev < 1e-8;
            if (def == WorkDef::TPM)
                ok = ok && dist.min_weight() >= -1e-12;
            det += std::string(work_def_name(def)) + " resum dev " + fmt(resum_dev) + " ";
        }
        report(7, "quasi-distribution integrity", ok, det);
    }

    // ---- criterion 8: generalized Jarzynski equalities ----
    {
        bool ok = true;
        std::string det;
        DensityMatrix thermal0 = thermal_state(nocoh, 0.0, 80);
        for (WorkDef def : {WorkDef::TPM, WorkDef::FCS, WorkDef::MH}) {
            const JarzynskiReport r = jarzynski_check(thermal0, nocoh, def, 4000, 80);
            ok = ok && std::abs(r.lhs - 1.0) < 1e-8 && std::abs(r.rhs - 1.0) < 1e-8;
        }
        for (WorkDef def : {WorkDef::TPM, WorkDef::FCS, WorkDef::MH}) {
            const JarzynskiReport r = jarzynski_check(q80.rho0, fig1, def, 4000, 80);
            ok = ok && r.discrepancy < 1e-8;
            det += std::string(work_def_name(def)) + " dev " + fmt(r.discrepancy) + " ";
        }
        const JarzynskiReport rc = gong_jarzynski_check(fig1, 1000000, 77);
        const bool classical_ok = rc.discrepancy <= 3.0 * rc.lhs_stderr + 1e-12;
        report(8, "generalized Jarzynski equalities", ok && classical_ok,
               det + "classical dev " + fmt(rc.discrepancy) + " vs 3 sigma " +
                   fmt(3.0 * rc.lhs_stderr));
    }

    // ---- criterion 9: dephasing identity ----
    {
        const DensityMatrix deph = dephase(q80.rho0, q80.h0);
        const auto identity_linf = [&](int n) {
            const PhaseGrid grid = make_grid(fig1, fig1.coherent_center_x(),
                                             fig1.coherent_center_p(), n);
            const WignerField before = wigner_transform(q80.rho0, grid, fig1);
            const WignerField after = wigner_transform(deph, grid, fig1);
            const WignerField avg = angular_average(before, fig1, 256);
            return (after.values - avg.values).cwiseAbs().maxCoeff();
        };
        const double at512 = identity_linf(512);
        const double at256 = identity_linf(256);

        const VectorXd etas = make_eta_grid(-4.0, 4.0, 161);
        const SpectralContext dctx = SpectralContext::build(deph, q80.h0, q80.ht, q80.u);
        const VectorXcd tpm = characteristic_function(dctx, WorkDef::TPM, etas).values;
        const VectorXcd fcs = characteristic_function(dctx, WorkDef::FCS, etas).values;
        const VectorXcd mh = characteristic_function(dctx, WorkDef::MH, etas).values;
        const double collapse = std::max((tpm - fcs).cwiseAbs().maxCoeff(),
                                         std::max((tpm - mh).cwiseAbs().maxCoeff(),
                                                  (fcs - mh).cwiseAbs().maxCoeff()));
        report(9, "measurement dephasing identity",
               at512 < 1e-4 && at512 < at256 && collapse < 1e-10,
               "L-inf 512^2 " + fmt(at512) + ", 256^2 " + fmt(at256) +
                   ", post-measurement CF collapse " + fmt(collapse));
    }

    // ---- criterion 10: figure reproduction through the CLI ----
    {
        namespace fs = std::filesystem;
        RunConfig cfg;
        cfg.eta_count = 33; // includes +-0.25 k grid and the [1,4] window
        cfg.out_dir = (fs::temp_directory_path() / "qws_acceptance_fig1").string();
        fs::remove_all(cfg.out_dir);
        cmd_fig1(cfg);

        auto load = [](const fs::path& p) {
            std::ifstream is(p);
            std::vector<std::vector<double>> rows;
            std::string line;
            bool header = false;
            while (std::getline(is, line)) {
                if (line.empty() || line[0] == '#')
                    continue;
                if (!header) {
                    header = true;
                    continue;
                }
                std::vector<double> row;
                std::stringstream ss(line);
                std::string cell;
                while (std::getline(ss, cell, ','))
                    row.push_back(std::stod(cell));
                rows.push_back(row);
            }
            return rows;
        };
        const auto re = load(fs::path(cfg.out_dir) / "fig1_real.csv");
        const auto im = load(fs::path(cfg.out_dir) / "fig1_imag.csv");
        bool ok = re.size() == 33 && im.size() == 33;
        double overlay_worst = 0.0, separation = 0.0;
        for (size_t i = 0; ok && i < re.size(); ++i) {
            ok = ok && re[i][0] == im[i][0]; // identical eta columns
            const double eta = re[i][0];
            const Complex cl{re[i][1], im[i][1]};
            const Complex phi0{re[i][2], im[i][2]};
            const Complex fc{re[i][3], im[i][3]};
            const Complex mc{re[i][4], im[i][4]};
            if (std::abs(eta) <= 1.0 + 1e-12)
                overlay_worst = std::max(overlay_worst, std::abs(phi0 - cl) / std::abs(cl));
            if (eta >= 1.0 - 1e-12)
                separation = std::max(separation, std::abs(fc - mc));
        }
        ok = ok && overlay_worst < 1e-3 && separation > 0.01;
        report(10, "figure series via cmd_fig1", ok,
               "zeroth-order overlay worst rel " + fmt(overlay_worst) +
                   ", corrected-series separation " + fmt(separation));
    }

    std::printf("%s (total runtime %.1fs)\n",
                g_all_ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED",
                omp_get_wtime() - t_total);
    return g_all_ok ? 0 : 1;
}
