#include "qws/classical.hpp"

#include <cmath>
#include <vector>

#include "qws/rng.hpp"

namespace qws {

namespace {

constexpr std::int64_t kBlock = 16384;

struct Kahan {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

PhasePoint sample_point(const GaussianPhaseDensity& d, std::uint64_t seed, std::int64_t i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    double g0, g1;
    rng.next_gaussian_pair(g0, g1);
    return {d.mean.x + std::sqrt(d.var_x) * g0, d.mean.p + std::sqrt(d.var_p) * g1};
}

} // namespace

double GaussianPhaseDensity::norm() const {
    return 1.0 / (2.0 * M_PI * std::sqrt(var_x * var_p));
}

double GaussianPhaseDensity::operator()(const PhasePoint& z) const {
    const double dx = z.x - mean.x;
    const double dp = z.p - mean.p;
    return norm() * std::exp(-0.5 * (dx * dx / var_x + dp * dp / var_p));
}

double classical_hamiltonian(const PhasePoint& z, double t, const DriveProtocol& p) {
    const double dx = z.x - p.center(t);
    return z.p * z.p / (2.0 * p.mass) + 0.5 * p.mass * p.omega * p.omega * dx * dx;
}

PhasePoint flow_linear_center(const PhasePoint& z, double c0, double cvel,
                              double t0, double t1, const DriveProtocol& p) {
    // co-moving frame: xi = x - c(t), v = p/m - cvel rotates rigidly
    const double w = p.omega;
    const double xi0 = z.x - (c0 + cvel * t0);
    const double v0 = z.p / p.mass - cvel;
    const double cw = std::cos(w * (t1 - t0));
    const double sw = std::sin(w * (t1 - t0));
    const double xi1 = xi0 * cw + (v0 / w) * sw;
    const double v1 = -xi0 * w * sw + v0 * cw;
    return {xi1 + c0 + cvel * t1, p.mass * (v1 + cvel)};
}

PhasePoint newton_map(const PhasePoint& z0, double t, const DriveProtocol& p) {
    p.validate();
    const double w = p.omega, u = p.drag_speed, m = p.mass;
    const double cw = std::cos(w * t), sw = std::sin(w * t);
    return {z0.x * cw + z0.p / (m * w) * sw + u * t - (u / w) * sw,
            -z0.x * m * w * sw + z0.p * cw + m * u * (1.0 - cw)};
}

PhasePoint inverse_map(const PhasePoint& zt, double t, const DriveProtocol& p) {
    p.validate();
    const double w = p.omega, u = p.drag_speed, m = p.mass;
    const double cw = std::cos(w * t), sw = std::sin(w * t);
    return {zt.x * cw - zt.p / (m * w) * sw - u * (t * cw - sw / w),
            zt.x * m * w * sw + zt.p * cw - m * u * (w * t * sw + cw - 1.0)};
}

ClassicalWorkSample classical_work(const PhasePoint& z0, const DriveProtocol& p) {
    const PhasePoint zt = newton_map(z0, p.duration, p);
    const double w = classical_hamiltonian(zt, p.duration, p) - classical_hamiltonian(z0, 0.0, p);
    return {z0, zt, w};
}

double classical_work_quadrature(const PhasePoint& z0, const DriveProtocol& p, int panels) {
    // dH/dt = -m omega^2 u (x(t) - u t), x(t) known in closed form
    static const double gl_x[4] = {0.06943184420297371, 0.33000947820757187,
                                   0.66999052179242813, 0.93056815579702629};
    static const double gl_w[4] = {0.17392742256872693, 0.32607257743127307,
                                   0.32607257743127307, 0.17392742256872693};
    const double h = p.duration / panels;
    Kahan acc;
    for (int k = 0; k < panels; ++k) {
        for (int g = 0; g < 4; ++g) {
            const double t = (k + gl_x[g]) * h;
            const PhasePoint z = newton_map(z0, t, p);
            const double dhdt =
                -p.mass * p.omega * p.omega * p.drag_speed * (z.x - p.center(t));
            acc.add(gl_w[g] * h * dhdt);
        }
    }
    return acc.sum;
}

GaussianPhaseDensity classical_initial_density(const DriveProtocol& p) {
    p.validate();
    GaussianPhaseDensity d;
    d.mean = {p.coherent_center_x(), p.coherent_center_p()};
    d.var_x = 1.0 / (p.beta * p.mass * p.omega * p.omega);
    d.var_p = p.mass / p.beta;
    return d;
}

Complex cf_classical_closed(double eta, const DriveProtocol& p) {
    const double w = p.omega;
    const double mu2 = p.mass * p.drag_speed * p.drag_speed;
    const double drift = std::cos(w * p.pre_time) - std::cos(w * (p.pre_time + p.duration));
    const double damp = (1.0 - std::cos(w * p.duration)) / p.beta;
    return std::exp(Complex{-mu2 * eta * eta * damp, mu2 * eta * drift});
}

VectorXcd cf_classical_closed(const VectorXd& etas, const DriveProtocol& p) {
    p.validate();
    VectorXcd out(etas.size());
    for (Eigen::Index i = 0; i < etas.size(); ++i)
        out[i] = cf_classical_closed(etas[i], p);
    return out;
}

McCf cf_classical_mc(const VectorXd& etas, const DriveProtocol& p,
                     std::int64_t n_samples, std::uint64_t seed) {
    p.validate();
    if (n_samples < 1000)
        throw DomainError("cf_classical_mc: needs n_samples >= 1000");
    const GaussianPhaseDensity d = classical_initial_density(p);
    const int ne = static_cast<int>(etas.size());
    const std::int64_t nblocks = (n_samples + kBlock - 1) / kBlock;

    // per-block partial sums, combined in block order afterwards
    std::vector<std::vector<double>> pc(nblocks), ps(nblocks), pc2(nblocks), ps2(nblocks);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < nblocks; ++b) {
        std::vector<Kahan> c(ne), s(ne), c2(ne), s2(ne);
        const std::int64_t lo = b * kBlock;
        const std::int64_t hi = std::min(n_samples, lo + kBlock);
        for (std::int64_t i = lo; i < hi; ++i) {
            const PhasePoint z0 = sample_point(d, seed, i);
            const double w = classical_work(z0, p).work;
            for (int e = 0; e < ne; ++e) {
                const double cw = std::cos(etas[e] * w);
                const double sw = std::sin(etas[e] * w);
                c[e].add(cw);
                s[e].add(sw);
                c2[e].add(cw * cw);
                s2[e].add(sw * sw);
            }
        }
        pc[b].resize(ne);
        ps[b].resize(ne);
        pc2[b].resize(ne);
        ps2[b].resize(ne);
        for (int e = 0; e < ne; ++e) {
            pc[b][e] = c[e].sum;
            ps[b][e] = s[e].sum;
            pc2[b][e] = c2[e].sum;
            ps2[b][e] = s2[e].sum;
        }
    }

    McCf out;
    out.etas = etas;
    out.values.resize(ne);
    out.stderr_re.resize(ne);
    out.stderr_im.resize(ne);
    const double n = static_cast<double>(n_samples);
    for (int e = 0; e < ne; ++e) {
        Kahan c, s, c2, s2;
        for (std::int64_t b = 0; b < nblocks; ++b) {
            c.add(pc[b][e]);
            s.add(ps[b][e]);
            c2.add(pc2[b][e]);
            s2.add(ps2[b][e]);
        }
        const double mc = c.sum / n, ms = s.sum / n;
        out.values[e] = Complex{mc, ms};
        const double vc = std::max(0.0, c2.sum / n - mc * mc);
        const double vs = std::max(0.0, s2.sum / n - ms * ms);
        out.stderr_re[e] = std::sqrt(vc / n);
        out.stderr_im[e] = std::sqrt(vs / n);
    }
    return out;
}

WorkStats classical_work_stats(const DriveProtocol& p, std::int64_t n_samples,
                               std::uint64_t seed) {
    p.validate();
    const GaussianPhaseDensity d = classical_initial_density(p);
    const std::int64_t nblocks = (n_samples + kBlock - 1) / kBlock;
    std::vector<double> p1(nblocks), p2(nblocks), p3(nblocks), p4(nblocks);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < nblocks; ++b) {
        Kahan s1, s2, s3, s4;
        const std::int64_t lo = b * kBlock;
        const std::int64_t hi = std::min(n_samples, lo + kBlock);
        for (std::int64_t i = lo; i < hi; ++i) {
            const double w = classical_work(sample_point(d, seed, i), p).work;
            s1.add(w);
            s2.add(w * w);
            s3.add(w * w * w);
            s4.add(w * w * w * w);
        }
        p1[b] = s1.sum;
        p2[b] = s2.sum;
        p3[b] = s3.sum;
        p4[b] = s4.sum;
    }
    Kahan s1, s2, s3, s4;
    for (std::int64_t b = 0; b < nblocks; ++b) {
        s1.add(p1[b]);
        s2.add(p2[b]);
        s3.add(p3[b]);
        s4.add(p4[b]);
    }
    const double n = static_cast<double>(n_samples);
    const double m1 = s1.sum / n, m2 = s2.sum / n, m3 = s3.sum / n, m4 = s4.sum / n;
    WorkStats st;
    st.mean = m1;
    st.var = m2 - m1 * m1;
    st.mean_stderr = std::sqrt(st.var / n);
    // var of the variance estimator: (mu4 - var^2) / n
    const double mu4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1 * m1 * m1 * m1;
    st.var_stderr = std::sqrt(std::max(0.0, mu4 - st.var * st.var) / n);
    return st;
}

JarzynskiReport gong_jarzynski_check(const DriveProtocol& p, std::int64_t n_samples,
                                     std::uint64_t seed) {
    p.validate();
    if (n_samples < 1000)
        throw DomainError("gong_jarzynski_check: needs n_samples >= 1000");
    const GaussianPhaseDensity d0 = classical_initial_density(p);
    const std::int64_t nblocks = (n_samples + kBlock - 1) / kBlock;
    std::vector<double> p1(nblocks), p2(nblocks);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < nblocks; ++b) {
        Kahan s1, s2;
        const std::int64_t lo = b * kBlock;
        const std::int64_t hi = std::min(n_samples, lo + kBlock);
        for (std::int64_t i = lo; i < hi; ++i) {
            const double w = classical_work(sample_point(d0, seed, i), p).work;
            const double e = std::exp(-p.beta * w); // dF = 0 for the dragged well
            s1.add(e);
            s2.add(e * e);
        }
        p1[b] = s1.sum;
        p2[b] = s2.sum;
    }
    Kahan s1, s2;
    for (std::int64_t b = 0; b < nblocks; ++b) {
        s1.add(p1[b]);
        s2.add(p2[b]);
    }
    const double n = static_cast<double>(n_samples);
    const double lhs = s1.sum / n;
    const double lvar = std::max(0.0, s2.sum / n - lhs * lhs);

    // Reverse process: equilibrium of H(tau), drive center u tau - u t,
    // evolve for tau, flip momentum.  Covariance is preserved by the flow,
    // so all three densities are Gaussians with the same covariance and the
    // quotient-product integral has a closed form
    //   exp( (1/2)[mu*^T S mu* - a^T S a - b^T S b + c^T S c] ),
    // with mu* = a + b - c and S the shared inverse covariance.
    const PhasePoint rev_mean0{p.drag_speed * p.duration, 0.0};
    const PhasePoint rev_meanT = flow_linear_center(
        rev_mean0, p.drag_speed * p.duration, -p.drag_speed, 0.0, p.duration, p);
    const double ax = rev_meanT.x, ap = -rev_meanT.p;
    const double bx = d0.mean.x, bp = d0.mean.p;
    const double cx = 0.0, cp = 0.0; // equilibrium of H(0)
    const double sx = 1.0 / d0.var_x, sp = 1.0 / d0.var_p;
    const double mx = ax + bx - cx, mp = ap + bp - cp;
    const double expo = 0.5 * (mx * mx * sx + mp * mp * sp - ax * ax * sx - ap * ap * sp -
                               bx * bx * sx - bp * bp * sp + cx * cx * sx + cp * cp * sp);
    const double rhs = std::exp(expo);

    JarzynskiReport r;
    r.definition = WorkDef::Classical;
    r.lhs = lhs;
    r.rhs = rhs;
    r.delta_f = 0.0;
    r.discrepancy = std::abs(lhs - rhs);
    r.lhs_stderr = std::sqrt(lvar / n);
    return r;
}

} // namespace qws
