#include "qws/reference.hpp"

#include <cmath>

namespace qws::ref {

namespace {
constexpr Complex kI{0.0, 1.0};
}

FockOperator propagator_spectral(const DriveProtocol& p, double t0, double t1,
                                 int steps, int dim) {
    p.validate();
    if (!(t0 < t1))
        throw DomainError("propagator_spectral: requires t0 < t1");
    if (steps < 1)
        throw DomainError("propagator_spectral: requires steps >= 1");
    const double dt = (t1 - t0) / steps;
    MatrixXcd u = MatrixXcd::Identity(dim, dim);
    for (int k = 0; k < steps; ++k) {
        const double tm = t0 + (k + 0.5) * dt;
        FockOperator h = build_hamiltonian(p, tm, dim);
        FockOperator e = herm_exp(h, -kI * dt / p.hbar);
        u = (e.mat * u).eval();
    }
    return FockOperator(std::move(u));
}

VectorXcd cf_triple_sum(const DensityMatrix& rho0, const FockOperator& h0,
                        const FockOperator& ht, const FockOperator& u,
                        const VectorXd& etas, int def) {
    const int n = rho0.dim();
    Spectrum s0 = spectrum(h0);
    Spectrum st = spectrum(ht);
    const MatrixXcd w = st.vectors.adjoint() * u.mat * s0.vectors;
    const MatrixXcd rho = s0.vectors.adjoint() * rho0.mat * s0.vectors;

    VectorXcd out(etas.size());
    for (Eigen::Index ie = 0; ie < etas.size(); ++ie) {
        const double eta = etas[ie];
        Complex acc{0.0, 0.0};
        for (int m = 0; m < n; ++m) {
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    if (def == 0 && a != b)
                        continue; // TPM: first measurement dephases rho
                    const Complex t = w(m, a) * rho(a, b) * std::conj(w(m, b));
                    Complex phase;
                    if (def == 0 || def == 1) {
                        const double half = (def == 0) ? st.values[m] - s0.values[a]
                                                       : st.values[m] -
                                                             0.5 * (s0.values[a] + s0.values[b]);
                        phase = std::exp(kI * eta * half);
                    } else {
                        phase = 0.5 * (std::exp(kI * eta * (st.values[m] - s0.values[a])) +
                                       std::exp(kI * eta * (st.values[m] - s0.values[b])));
                    }
                    acc += phase * t;
                }
            }
        }
        out[ie] = acc;
    }
    return out;
}

namespace {

/// Hermite-function column psi_n(x), n = 0..N-1.
VectorXd hermite_column(double x, int n, const DriveProtocol& p) {
    VectorXd psi(n);
    const double mwh = p.mass * p.omega / p.hbar;
    psi[0] = std::pow(mwh / M_PI, 0.25) * std::exp(-0.5 * mwh * x * x);
    if (n > 1)
        psi[1] = std::sqrt(2.0 * mwh) * x * psi[0];
    for (int k = 1; k + 1 < n; ++k)
        psi[k + 1] = (std::sqrt(2.0 * mwh) * x * psi[k] -
                      std::sqrt(static_cast<double>(k)) * psi[k - 1]) /
                     std::sqrt(k + 1.0);
    return psi;
}

} // namespace

double wigner_point_quadrature(const DensityMatrix& rho, double x, double p,
                               const DriveProtocol& proto) {
    static const double gl_x[4] = {0.06943184420297371, 0.33000947820757187,
                                   0.66999052179242813, 0.93056815579702629};
    static const double gl_w[4] = {0.17392742256872693, 0.32607257743127307,
                                   0.32607257743127307, 0.17392742256872693};
    const int n = rho.dim();
    const double spread = std::sqrt(2.0 * proto.hbar * (n + 4.0) / (proto.mass * proto.omega));
    const double half = 2.0 * (std::abs(x) + 1.6 * spread);
    const int panels =
        std::max(96, static_cast<int>(2.0 * half * std::abs(p) / proto.hbar) + 96);
    const double h = 2.0 * half / panels;
    Complex acc{0.0, 0.0};
    for (int k = 0; k < panels; ++k) {
        for (int g = 0; g < 4; ++g) {
            const double y = -half + (k + gl_x[g]) * h;
            const VectorXd left = hermite_column(x + 0.5 * y, n, proto);
            const VectorXd right = hermite_column(x - 0.5 * y, n, proto);
            const Complex bra = left.cast<Complex>().dot(rho.mat * right.cast<Complex>());
            acc += gl_w[g] * h * std::exp(Complex{0.0, -p * y / proto.hbar}) * bra;
        }
    }
    return (acc / (2.0 * M_PI * proto.hbar)).real();
}

} // namespace qws::ref
