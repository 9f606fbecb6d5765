// Benchmark of the OpenMP kernels against their serial reference
// implementations, with agreement checks.

#include <cstdio>
#include <omp.h>

#include "qws/classical.hpp"
#include "qws/operators.hpp"
#include "qws/reference.hpp"
#include "qws/wigner.hpp"
#include "qws/workstats.hpp"

using namespace qws;

namespace {

double max_dev(const VectorXcd& a, const VectorXcd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

void report(const char* name, double t_ref, double t_fast, double dev) {
    std::printf("%-28s ref %8.3fs   kernel %8.3fs   speedup %5.2fx   max dev %.2e\n",
                name, t_ref, t_fast, t_ref / t_fast, dev);
}

} // namespace

int main() {
    DriveProtocol p; // all couplings 1, tau' = 1, tau = 2
    std::printf("threads: %d\n", omp_get_max_threads());

    {
        const int dim = 48, steps = 400;
        double t0 = omp_get_wtime();
        FockOperator uref = ref::propagator_spectral(p, 0.0, p.duration, steps, dim);
        double t1 = omp_get_wtime();
        FockOperator u = propagator(p, 0.0, p.duration, steps, dim);
        double t2 = omp_get_wtime();
        report("propagator (N=48, 400)", t1 - t0, t2 - t1,
               (uref.mat - u.mat).cwiseAbs().maxCoeff());
    }

    {
        const int dim = 64, steps = 800;
        DensityMatrix rho0 = displaced_thermal(p, dim);
        FockOperator h0 = build_hamiltonian(p, 0.0, dim);
        FockOperator ht = build_hamiltonian(p, p.duration, dim);
        FockOperator u = propagator(p, 0.0, p.duration, steps, dim);
        SpectralContext ctx = SpectralContext::build(rho0, h0, ht, u);
        const VectorXd etas = make_eta_grid(-4.0, 4.0, 81);

        double t0 = omp_get_wtime();
        VectorXcd fref = ref::cf_triple_sum(rho0, h0, ht, u, etas, 1);
        double t1 = omp_get_wtime();
        VectorXcd fcs = characteristic_function(ctx, WorkDef::FCS, etas).values;
        double t2 = omp_get_wtime();
        report("cf FCS (N=64, 81 eta)", t1 - t0, t2 - t1, max_dev(fref, fcs));

        t0 = omp_get_wtime();
        VectorXcd mref = ref::cf_triple_sum(rho0, h0, ht, u, etas, 2);
        t1 = omp_get_wtime();
        VectorXcd mh = characteristic_function(ctx, WorkDef::MH, etas).values;
        t2 = omp_get_wtime();
        report("cf MH (N=64, 81 eta)", t1 - t0, t2 - t1, max_dev(mref, mh));
    }

    {
        const int dim = 48;
        DensityMatrix rho0 = displaced_thermal(p, dim);
        PhaseGrid grid = make_grid(p, p.coherent_center_x(), p.coherent_center_p(), 128);

        double t0 = omp_get_wtime();
        WignerField w = wigner_transform(rho0, grid, p);
        double t1 = omp_get_wtime();
        // reference: position-space quadrature on a sparse subset of nodes
        double dev = 0.0;
        for (int i = 0; i < grid.nx; i += 32)
            for (int j = 0; j < grid.np; j += 32)
                dev = std::max(dev, std::abs(w.values(i, j) -
                                             ref::wigner_point_quadrature(
                                                 rho0, grid.x(i), grid.p(j), p)));
        double t2 = omp_get_wtime();
        report("wigner (128^2 vs quad 4^2)", t2 - t1, t1 - t0, dev);
    }

    {
        const VectorXd etas = make_eta_grid(-4.0, 4.0, 41);
        double t0 = omp_get_wtime();
        McCf mc = cf_classical_mc(etas, p, 400000, 7);
        double t1 = omp_get_wtime();
        VectorXcd closed = cf_classical_closed(etas, p);
        double dev = max_dev(mc.values, closed);
        std::printf("%-28s kernel %8.3fs   dev vs closed %.2e (MC noise)\n",
                    "classical MC (4e5 x 41)", t1 - t0, dev);
    }

    return 0;
}
