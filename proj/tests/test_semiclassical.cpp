#include <doctest.h>

#include "qws/semiclassical.hpp"

using namespace qws;

namespace {

// reduced scan policy to keep unit tests fast; acceptance runs the default
ScanPolicy small_policy() {
    ScanPolicy pol;
    pol.dim_scale = 40.0;
    pol.steps_base = 300;
    return pol;
}

} // namespace

TEST_CASE("Wigner-Kirkwood kernel") {
    DriveProtocol p;

    SUBCASE("vanishes at eta = 0") {
        CHECK(std::abs(wigner_kirkwood_f(0.0, {1.3, -0.7}, 0.5, p)) == 0.0);
    }

    SUBCASE("value at the origin") {
        const Complex f = wigner_kirkwood_f(1.0, {0.0, 0.0}, 0.0, p);
        CHECK(f.real() == doctest::Approx(-0.125).epsilon(1e-14));
        CHECK(std::abs(f.imag()) < 1e-16);
    }

    SUBCASE("polynomial in (i eta) with real coefficients") {
        for (double eta : {0.3, 1.0, 2.5}) {
            const PhasePoint z{0.8, -1.1};
            const Complex plus = wigner_kirkwood_f(eta, z, 0.4, p);
            const Complex minus = wigner_kirkwood_f(-eta, z, 0.4, p);
            CHECK(std::abs(plus - std::conj(minus)) < 1e-14);
        }
    }

    SUBCASE("matches the explicit expression") {
        const double eta = 1.7, t = 0.9;
        const PhasePoint z{0.4, 1.2};
        const Complex ie{0.0, eta};
        const double vx = z.x - t; // m = omega = u = 1
        const Complex expect =
            ie * ie / 8.0 * (1.0 - ie / 3.0 * vx * vx - ie / 3.0 * z.p * z.p);
        CHECK(std::abs(wigner_kirkwood_f(eta, z, t, p) - expect) < 1e-14);
    }
}

TEST_CASE("complex polynomial fit") {
    SUBCASE("recovers exact polynomial data") {
        std::vector<double> xs{0.8, 0.6, 0.45, 0.34, 0.25, 0.19};
        VectorXcd ys(6);
        for (int i = 0; i < 6; ++i) {
            const double x = xs[i];
            ys[i] = Complex{1.0 - 0.5 * x * x, 0.25 * x * x} +
                    Complex{0.0, 0.125} * x * x * x * x;
        }
        const PolyFit fit = polyfit_complex(xs, ys, 4);
        CHECK(std::abs(fit.coeffs[0] - Complex{1.0, 0.0}) < 1e-12);
        CHECK(std::abs(fit.coeffs[1]) < 1e-12);
        CHECK(std::abs(fit.coeffs[2] - Complex{-0.5, 0.25}) < 1e-11);
        CHECK(std::abs(fit.coeffs[3]) < 1e-10);
        CHECK(fit.residual < 1e-13);
    }

    SUBCASE("needs more samples than coefficients") {
        std::vector<double> xs{0.5, 0.4, 0.3, 0.2};
        VectorXcd ys = VectorXcd::Ones(4);
        CHECK_THROWS_AS(polyfit_complex(xs, ys, 4), DomainError);
    }
}

TEST_CASE("scan policy validation") {
    ScanPolicy pol;
    CHECK_NOTHROW(pol.validate(1.0));

    SUBCASE("ladder must descend") {
        ScanPolicy bad = pol;
        std::swap(bad.hbar_ladder[0], bad.hbar_ladder[1]);
        CHECK_THROWS_AS(bad.validate(1.0), DomainError);
    }
    SUBCASE("ladder must not exceed the protocol hbar") {
        CHECK_THROWS_AS(pol.validate(0.5), DomainError);
    }
    SUBCASE("ladder needs enough rungs for the fit") {
        ScanPolicy bad = pol;
        bad.hbar_ladder = {0.8, 0.6, 0.45, 0.34};
        CHECK_THROWS_AS(bad.validate(1.0), DomainError);
    }
}

TEST_CASE("hbar scan on the reduced policy") {
    DriveProtocol p;
    ScanEngine engine(p, small_policy());

    SUBCASE("zeroth order tracks the classical value") {
        for (double eta : {0.25, 0.5, 1.0}) {
            const HbarScanResult fcs = engine.scan(eta, WorkDef::FCS);
            const HbarScanResult mh = engine.scan(eta, WorkDef::MH);
            const Complex cl = cf_classical_closed(eta, p);
            CHECK(std::abs(fcs.phi0() - cl) / std::abs(cl) < 1e-2);
            CHECK(std::abs(mh.phi0() - cl) / std::abs(cl) < 1e-2);
            CHECK(std::abs(fcs.phi1()) < 1e-2 * std::abs(fcs.phi0()));
            CHECK(std::abs(mh.phi1()) < 1e-2 * std::abs(mh.phi0()));
        }
    }

    SUBCASE("coherence-free scans coincide at every order") {
        DriveProtocol p0 = p;
        p0.pre_time = 0.0;
        ScanEngine engine0(p0, small_policy());
        const HbarScanResult fcs = engine0.scan(1.0, WorkDef::FCS);
        const HbarScanResult mh = engine0.scan(1.0, WorkDef::MH);
        const double err = std::max({fcs.err(0), fcs.err(2), mh.err(0), mh.err(2), 1e-9});
        CHECK(std::abs(fcs.phi0() - mh.phi0()) < 3.0 * err);
        CHECK(std::abs(fcs.phi2() - mh.phi2()) < 3.0 * err);
    }

    SUBCASE("residual gate rejects a bad fit") {
        HbarScanResult r;
        r.fit.coeffs = VectorXcd::Ones(5);
        r.fit.stderrs = VectorXd::Ones(5);
        r.fit.residual = 0.5;
        CHECK_THROWS_AS(r.check_gate(), AccuracyError);
    }
}

TEST_CASE("phi2 comparison table on the reduced policy") {
    DriveProtocol p;
    VectorXd etas(3);
    etas << 1.0, 2.0, 3.0;
    const auto rows = phi2_compare(etas, p, small_policy());
    REQUIRE(rows.size() == 3);
    bool any_significant = false;
    for (const auto& r : rows) {
        CHECK(r.difference == std::abs(r.phi2_fcs - r.phi2_mh));
        any_significant = any_significant || r.significant;
    }
    MESSAGE("significant split rows: ", any_significant);
}
