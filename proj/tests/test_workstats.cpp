#include <doctest.h>

#include "qws/classical.hpp"
#include "qws/operators.hpp"
#include "qws/reference.hpp"
#include "qws/workstats.hpp"

using namespace qws;

namespace {

struct Setup {
    DriveProtocol p;
    int dim;
    DensityMatrix rho0;
    FockOperator h0, ht, u;
    SpectralContext ctx;
};

Setup make_setup(double pre_time, int dim, int steps) {
    DriveProtocol p;
    p.pre_time = pre_time;
    DensityMatrix rho0 = displaced_thermal(p, dim);
    FockOperator h0 = build_hamiltonian(p, 0.0, dim);
    FockOperator ht = build_hamiltonian(p, p.duration, dim);
    FockOperator u = propagator(p, 0.0, p.duration, steps, dim);
    SpectralContext ctx = SpectralContext::build(rho0, h0, ht, u);
    return {p, dim, std::move(rho0), std::move(h0), std::move(ht), std::move(u),
            std::move(ctx)};
}

const Setup& fig1() {
    static const Setup s = make_setup(1.0, 80, 4000);
    return s;
}

const Setup& thermal_setup() {
    static const Setup s = make_setup(0.0, 80, 4000);
    return s;
}

} // namespace

TEST_CASE("characteristic functions: normalization and symmetry") {
    const Setup& s = fig1();
    const VectorXd etas = make_eta_grid(-4.0, 4.0, 41);
    for (WorkDef def : {WorkDef::TPM, WorkDef::FCS, WorkDef::MH}) {
        const CharacteristicSamples cs = characteristic_function(s.ctx, def, etas);
        cs.validate(); // Phi(0) = 1, conjugate symmetry
        CHECK(std::abs(cs.values[20] - Complex{1.0, 0.0}) < 1e-12);
    }
}

TEST_CASE("coherence-free states collapse the three definitions") {
    const Setup& s = thermal_setup();
    const VectorXd etas = make_eta_grid(-4.0, 4.0, 81);
    const VectorXcd tpm = characteristic_function(s.ctx, WorkDef::TPM, etas).values;
    const VectorXcd fcs = characteristic_function(s.ctx, WorkDef::FCS, etas).values;
    const VectorXcd mh = characteristic_function(s.ctx, WorkDef::MH, etas).values;
    CHECK((tpm - fcs).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((tpm - mh).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("undriven well does no work") {
    DriveProtocol still;
    still.drag_speed = 0.0;
    still.pre_time = 0.0;
    const int dim = 60;
    DensityMatrix rho0 = thermal_state(still, 0.0, dim);
    FockOperator h0 = build_hamiltonian(still, 0.0, dim);
    FockOperator ht = build_hamiltonian(still, still.duration, dim);
    FockOperator u = propagator(still, 0.0, still.duration, 256, dim);
    const VectorXd etas = make_eta_grid(-4.0, 4.0, 21);
    const VectorXcd tpm = cf_tpm(rho0, h0, ht, u, etas).values;
    for (Eigen::Index i = 0; i < etas.size(); ++i)
        CHECK(std::abs(tpm[i] - Complex{1.0, 0.0}) < 1e-10);
}

TEST_CASE("factorized kernels match the literal triple sum") {
    const Setup s = make_setup(1.0, 28, 300);
    const VectorXd etas = make_eta_grid(-3.0, 3.0, 13);
    for (int def = 0; def < 3; ++def) {
        const VectorXcd lit = ref::cf_triple_sum(s.rho0, s.h0, s.ht, s.u, etas, def);
        const VectorXcd fast =
            characteristic_function(s.ctx, static_cast<WorkDef>(def), etas).values;
        CHECK((lit - fast).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("moments") {
    const Setup& s = fig1();

    SUBCASE("FCS first moment equals the internal-energy change") {
        const auto m = work_moments(s.ctx, WorkDef::FCS, 1);
        const MatrixXcd rho_t = s.u.mat * s.rho0.mat * s.u.mat.adjoint();
        const double de = (rho_t * s.ht.mat).trace().real() -
                          (s.rho0.mat * s.h0.mat).trace().real();
        CHECK(std::abs(m[0] - de) < 1e-8);
    }

    SUBCASE("finite differences of the CF agree with the analytic sums") {
        const auto m = work_moments(s.ctx, WorkDef::FCS, 2);
        const double h = 5e-3;
        VectorXd etas(5);
        for (int k = -2; k <= 2; ++k)
            etas[k + 2] = k * h;
        const VectorXcd v = characteristic_function(s.ctx, WorkDef::FCS, etas).values;
        const Complex d1 =
            (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h); // i <W>
        const Complex d2 =
            (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) /
            (12.0 * h * h); // -<W^2>
        CHECK(std::abs(d1.imag() - m[0]) < 1e-8);
        CHECK(std::abs(-d2.real() - m[1]) < 1e-7);
    }

    SUBCASE("FCS and MH agree to second order, split at third") {
        const auto fcs = work_moments(s.ctx, WorkDef::FCS, 3);
        const auto mh = work_moments(s.ctx, WorkDef::MH, 3);
        CHECK(std::abs(fcs[0] - mh[0]) < 1e-8);
        CHECK(std::abs(fcs[1] - mh[1]) < 1e-8);
        const double third_split = std::abs(fcs[2] - mh[2]);
        MESSAGE("third-moment split (coherent state): ", third_split);
        CHECK(third_split > 1e-4); // expected nonzero with initial coherence
    }

    SUBCASE("coherence-free states agree at all computed orders") {
        const auto fcs = work_moments(thermal_setup().ctx, WorkDef::FCS, 3);
        const auto mh = work_moments(thermal_setup().ctx, WorkDef::MH, 3);
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(fcs[j] - mh[j]) < 1e-10);
    }
}

TEST_CASE("quasi-distributions") {
    const Setup& s = fig1();
    const double tol = default_merge_tol(s.p);

    SUBCASE("trivial TPM distribution for the undriven thermal well") {
        DriveProtocol still;
        still.drag_speed = 0.0;
        still.pre_time = 0.0;
        const int dim = 50;
        DensityMatrix rho0 = thermal_state(still, 0.0, dim);
        FockOperator h0 = build_hamiltonian(still, 0.0, dim);
        FockOperator u = propagator(still, 0.0, still.duration, 128, dim);
        const WorkQuasiDistribution d =
            quasi_distribution(rho0, h0, h0, u, WorkDef::TPM, default_merge_tol(still));
        REQUIRE(d.support.size() == 1);
        CHECK(std::abs(d.support[0]) < 1e-10);
        CHECK(d.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("weights are real, normalized and TPM-positive") {
        for (WorkDef def : {WorkDef::TPM, WorkDef::FCS, WorkDef::MH}) {
            const WorkQuasiDistribution d = quasi_distribution(s.ctx, def, tol);
            d.validate();
            CHECK(std::abs(d.weight_sum() - 1.0) < 1e-10);
            CHECK(d.max_imag_residual < 1e-10);
            if (def == WorkDef::TPM)
                CHECK(d.min_weight() >= -1e-12);
        }
    }

    SUBCASE("coherent initial state makes FCS and MH weights negative") {
        const WorkQuasiDistribution fcs = quasi_distribution(s.ctx, WorkDef::FCS, tol);
        const WorkQuasiDistribution mh = quasi_distribution(s.ctx, WorkDef::MH, tol);
        MESSAGE("FCS min weight ", fcs.min_weight(), ", MH min weight ", mh.min_weight());
        CHECK(fcs.min_weight() < 0.0);
        CHECK(mh.min_weight() < 0.0);
        CHECK(fcs.negativity_count() > 0);
        CHECK(mh.negativity_count() > 0);
    }

    SUBCASE("FCS support has the half-quantum structure") {
        const WorkQuasiDistribution d = quasi_distribution(s.ctx, WorkDef::FCS, tol);
        const double half = 0.5 * s.p.quantum();
        for (size_t j = 0; j < d.support.size(); ++j) {
            if (std::abs(d.weights[j]) < 1e-12)
                continue;
            const double r = d.support[j] / half;
            CHECK(std::abs(r - std::round(r)) < 1e-6);
        }
    }

    SUBCASE("resummation reproduces the characteristic function") {
        const VectorXd etas = make_eta_grid(-4.0, 4.0, 33);
        for (WorkDef def : {WorkDef::TPM, WorkDef::FCS, WorkDef::MH}) {
            const WorkQuasiDistribution d = quasi_distribution(s.ctx, def, tol);
            const VectorXcd direct = characteristic_function(s.ctx, def, etas).values;
            CHECK((d.resum(etas) - direct).cwiseAbs().maxCoeff() < 1e-8);
        }
    }

    SUBCASE("merge tolerance must stay below the level spacing") {
        CHECK_THROWS_AS(quasi_distribution(s.ctx, WorkDef::TPM, 0.2), DomainError);
        CHECK_THROWS_AS(quasi_distribution(s.ctx, WorkDef::TPM, -1.0), DomainError);
    }
}

TEST_CASE("time reversal") {
    DriveProtocol p;
    const int dim = 80, steps = 4000;

    SUBCASE("undriven reverse state is the thermal state") {
        DriveProtocol still = p;
        still.drag_speed = 0.0;
        DensityMatrix r = reverse_final_state(still, 512, 60);
        DensityMatrix th = thermal_state(still, still.duration, 60);
        CHECK((r.mat - th.mat).cwiseAbs().maxCoeff() < 1e-10);
    }

    SUBCASE("reverse final state is a valid density matrix") {
        DensityMatrix r = reverse_final_state(p, steps, dim);
        CHECK(std::abs(r.mat.trace().real() - 1.0) < 1e-10);
        CHECK((r.mat - r.mat.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }

    SUBCASE("conjugated reverse propagator inverts the forward one") {
        FockOperator u = propagator(p, 0.0, p.duration, 1000, 48);
        FockOperator ur = reversed_propagator(p, 1000, 48);
        const MatrixXcd lhs = ur.mat.conjugate();
        CHECK((lhs - u.mat.adjoint()).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("generalized Jarzynski equalities") {
    DriveProtocol p;
    const int dim = 80, steps = 4000;

    SUBCASE("thermal initial state gives unity for every definition") {
        DriveProtocol p0 = p;
        p0.pre_time = 0.0;
        DensityMatrix rho0 = thermal_state(p0, 0.0, dim);
        for (WorkDef def : {WorkDef::TPM, WorkDef::FCS, WorkDef::MH}) {
            const JarzynskiReport r = jarzynski_check(rho0, p0, def, steps, dim);
            CHECK(std::abs(r.lhs - 1.0) < 1e-8);
            CHECK(std::abs(r.rhs - 1.0) < 1e-8);
            CHECK(std::abs(r.delta_f) < 1e-10);
        }
    }

    SUBCASE("coherent initial state: both sides agree per definition") {
        DensityMatrix rho0 = displaced_thermal(p, dim);
        const JarzynskiReport fcs = jarzynski_check(rho0, p, WorkDef::FCS, steps, dim);
        CHECK(fcs.discrepancy < 1e-8);
        const JarzynskiReport mh = jarzynski_check(rho0, p, WorkDef::MH, steps, dim);
        CHECK(mh.discrepancy < 1e-8);
        const JarzynskiReport tpm = jarzynski_check(rho0, p, WorkDef::TPM, steps, dim);
        CHECK(tpm.discrepancy < 1e-8);
        MESSAGE("FCS value ", fcs.lhs, ", MH value ", mh.lhs, ", TPM value ", tpm.lhs);
    }
}
