#include "qws/wigner.hpp"

#include <cmath>
#include <vector>

#include "qws/operators.hpp"

namespace qws {

namespace {

/// Scaled Laguerre ladder T_k = sqrt(k!/(k+d)!) (2|a|)^d e^{-xi/2} L_k^d(xi),
/// advanced in k.  All values stay O(1); the d-dependent seed is taken in
/// log space.
struct ScaledLaguerre {
    double xi;
    int d;
    double tkm1 = 0.0, tk = 0.0;
    int k = 0;

    ScaledLaguerre(double xi_, int d_, double log2a) : xi(xi_), d(d_) {
        const double logc0 = d * log2a - 0.5 * std::lgamma(d + 1.0) - 0.5 * xi;
        tk = (logc0 < -745.0) ? 0.0 : std::exp(logc0); // k = 0 value
    }

    double value() const { return tk; }

    void advance() { // k -> k+1
        const double r1 = std::sqrt((k + 1.0) / (k + 1.0 + d));
        double next;
        if (k == 0) {
            next = r1 * (1.0 + d - xi) * tk;
        } else {
            const double r2 = std::sqrt(static_cast<double>(k) / (k + d));
            next = (r1 * (2.0 * k + 1.0 + d - xi) * tk - (k + d) * r1 * r2 * tkm1) /
                   (k + 1.0);
        }
        tkm1 = tk;
        tk = next;
        ++k;
    }
};

} // namespace

double fock_wigner(int n, const PhasePoint& z, const DriveProtocol& p, bool* underflow) {
    if (n < 0)
        throw DomainError("fock_wigner: level must be >= 0");
    p.validate();
    if (underflow)
        *underflow = false;
    const double mw = p.mass * p.omega;
    const double xi = 2.0 * (mw * z.x * z.x + z.p * z.p / mw) / p.hbar; // 4 |alpha|^2
    if (0.5 * xi > 700.0) {
        if (underflow)
            *underflow = true;
        return 0.0;
    }
    // e^{-xi/2} L_k(xi) via the scaled recurrence; bounded by 1 in magnitude
    double tkm1 = 0.0, tk = std::exp(-0.5 * xi);
    for (int k = 0; k < n; ++k) {
        const double next = ((2.0 * k + 1.0 - xi) * tk - k * tkm1) / (k + 1.0);
        tkm1 = tk;
        tk = next;
    }
    return 2.0 * ((n % 2 == 0) ? tk : -tk);
}

StateMoments state_moments(const DensityMatrix& rho, const DriveProtocol& p) {
    const int n = rho.dim();
    const MatrixXcd x = position_operator(p, n).mat;
    const MatrixXcd pm = momentum_operator(p, n).mat;
    StateMoments m;
    m.mean_x = (rho.mat * x).trace().real();
    m.mean_p = (rho.mat * pm).trace().real();
    m.var_x = (rho.mat * x * x).trace().real() - m.mean_x * m.mean_x;
    m.var_p = (rho.mat * pm * pm).trace().real() - m.mean_p * m.mean_p;
    return m;
}

PhaseGrid make_grid(const DriveProtocol& p, double mean_x, double mean_p, int n,
                    double span_sigmas) {
    p.validate();
    const double mw = p.mass * p.omega;
    const double c = 1.0 / std::tanh(0.5 * p.beta * p.hbar * p.omega);
    const double sig_scaled = std::sqrt(0.5 * p.hbar * c); // thermal width, scaled coords
    const double r_mean = std::hypot(mean_x * std::sqrt(mw), mean_p / std::sqrt(mw));
    const double half = r_mean + span_sigmas * sig_scaled;
    PhaseGrid g;
    g.x_min = -half / std::sqrt(mw);
    g.x_max = half / std::sqrt(mw);
    g.p_min = -half * std::sqrt(mw);
    g.p_max = half * std::sqrt(mw);
    g.nx = g.np = n;
    g.validate();
    return g;
}

WignerField wigner_transform(const DensityMatrix& rho, const PhaseGrid& grid,
                             const DriveProtocol& p) {
    p.validate();
    grid.validate();
    const int n = rho.dim();
    const StateMoments sm = state_moments(rho, p);
    const double sx = std::sqrt(std::max(sm.var_x, 0.0));
    const double sp = std::sqrt(std::max(sm.var_p, 0.0));
    if (sm.mean_x - 6.0 * sx < grid.x_min || sm.mean_x + 6.0 * sx > grid.x_max ||
        sm.mean_p - 6.0 * sp < grid.p_min || sm.mean_p + 6.0 * sp > grid.p_max)
        throw CoverageError("wigner_transform: grid misses the state's 6-sigma support");

    WignerField field;
    field.grid = grid;
    field.hbar = p.hbar;
    field.values.resize(grid.nx, grid.np);
    const double mw = p.mass * p.omega;
    const double pref = 1.0 / (M_PI * p.hbar);

#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.np; ++j) {
            const double xs = grid.x(i) * std::sqrt(mw);
            const double ps = grid.p(j) / std::sqrt(mw);
            const double a2 = (xs * xs + ps * ps) / (2.0 * p.hbar); // |alpha|^2
            const double xi = 4.0 * a2;
            if (2.0 * a2 > 700.0) {
                field.values(i, j) = 0.0;
                continue;
            }
            const double log2a = 0.5 * std::log(std::max(xi, 1e-300));
            const Complex ephase =
                (xi > 0.0) ? std::conj(Complex{xs, ps} / std::sqrt(xs * xs + ps * ps))
                           : Complex{1.0, 0.0};
            double acc = 0.0;
            Complex phase_d{1.0, 0.0}; // e^{-i d theta}
            for (int d = 0; d < n; ++d) {
                ScaledLaguerre lag(xi, d, log2a);
                Complex inner{0.0, 0.0};
                for (int a = 0; a + d < n; ++a) {
                    const double t = (a % 2 == 0) ? lag.value() : -lag.value();
                    inner += t * rho.mat(a + d, a);
                    lag.advance();
                }
                if (d == 0)
                    acc += inner.real();
                else
                    acc += 2.0 * (phase_d * ephase * inner).real();
                phase_d *= ephase;
            }
            field.values(i, j) = pref * acc;
        }
    }
    return field;
}

DensityMatrix dephase(const DensityMatrix& rho, const FockOperator& h0) {
    if (rho.dim() != h0.dim())
        throw DimensionError("dephase: dimension mismatch");
    Spectrum s = spectrum(h0);
    const int n = rho.dim();
    const MatrixXcd rr = s.vectors.adjoint() * rho.mat * s.vectors;
    for (int i = 0; i + 1 < n; ++i) {
        if (s.values[i + 1] - s.values[i] < 1e-10) {
            const double pop = std::max(rr(i, i).real(), rr(i + 1, i + 1).real());
            if (pop > 1e-10)
                throw AmbiguityError(
                    "dephase: near-degenerate populated levels make the "
                    "measurement basis ambiguous");
        }
    }
    MatrixXcd diag = MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        diag(i, i) = rr(i, i).real();
    return DensityMatrix{(s.vectors * diag * s.vectors.adjoint()).eval()};
}

WignerField angular_average(const WignerField& field, const DriveProtocol& p,
                            int n_angles) {
    p.validate();
    if (n_angles < 256)
        throw DomainError("angular_average: needs >= 256 angles");
    const PhaseGrid& g = field.grid;
    const double mw = p.mass * p.omega;
    const double smw = std::sqrt(mw);

    // zero extension beyond the grid is legitimate only if the boundary has
    // already decayed
    double boundary_max = 0.0;
    for (int i = 0; i < g.nx; ++i)
        boundary_max = std::max({boundary_max, std::abs(field.values(i, 0)),
                                 std::abs(field.values(i, g.np - 1))});
    for (int j = 0; j < g.np; ++j)
        boundary_max = std::max({boundary_max, std::abs(field.values(0, j)),
                                 std::abs(field.values(g.nx - 1, j))});
    const bool boundary_live = boundary_max > 1e-6 * std::max(field.max_abs(), 1e-300);

    auto interp = [&](double x, double pp, bool& outside) -> double {
        const double fi = (x - g.x_min) / g.dx();
        const double fj = (pp - g.p_min) / g.dp();
        if (fi < 0.0 || fj < 0.0 || fi > g.nx - 1 || fj > g.np - 1) {
            outside = true;
            return 0.0;
        }
        const int i0 = std::min(static_cast<int>(fi), g.nx - 2);
        const int j0 = std::min(static_cast<int>(fj), g.np - 2);
        const double tx = fi - i0, tp = fj - j0;
        return (1 - tx) * (1 - tp) * field.values(i0, j0) +
               tx * (1 - tp) * field.values(i0 + 1, j0) +
               (1 - tx) * tp * field.values(i0, j0 + 1) +
               tx * tp * field.values(i0 + 1, j0 + 1);
    };

    WignerField out;
    out.grid = g;
    out.hbar = field.hbar;
    out.values.resize(g.nx, g.np);
    bool left_grid = false;

#pragma omp parallel for schedule(dynamic) reduction(|| : left_grid)
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.np; ++j) {
            const double r = std::hypot(g.x(i) * smw, g.p(j) / smw);
            double acc = 0.0;
            bool outside = false;
            for (int a = 0; a < n_angles; ++a) {
                const double phi = 2.0 * M_PI * a / n_angles;
                acc += interp(r * std::cos(phi) / smw, r * std::sin(phi) * smw, outside);
            }
            left_grid = left_grid || outside;
            out.values(i, j) = acc / n_angles;
        }
    }
    if (left_grid && boundary_live)
        throw CoverageError("angular_average: field support leaves the grid under rotation");
    return out;
}

} // namespace qws
