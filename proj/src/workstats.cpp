#include "qws/workstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qws {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kWeightFloor = 1e-14;

struct Kahan {
    double sum = 0.0, carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

VectorXcd phase_vector(const VectorXd& e, double factor) {
    VectorXcd out(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i)
        out[i] = std::exp(kI * factor * e[i]);
    return out;
}

/// Clusters (value, complex weight) entries whose values lie within tol.
struct ClusterSet {
    std::vector<double> values;
    std::vector<Complex> weights;
};

ClusterSet cluster_entries(std::vector<double>& vals, std::vector<Complex>& wgts,
                           double tol) {
    const size_t n = vals.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return vals[a] < vals[b]; });
    ClusterSet cs;
    Kahan wre, wim, vsum;
    size_t count = 0;
    double last = 0.0;
    auto flush = [&]() {
        if (count == 0) return;
        cs.values.push_back(vsum.sum / static_cast<double>(count));
        cs.weights.push_back(Complex{wre.sum, wim.sum});
        wre = {};
        wim = {};
        vsum = {};
        count = 0;
    };
    for (size_t idx : order) {
        const double v = vals[idx];
        if (count > 0 && v - last > tol)
            flush();
        wre.add(wgts[idx].real());
        wim.add(wgts[idx].imag());
        vsum.add(v);
        last = v;
        ++count;
    }
    flush();
    return cs;
}

double median_gap(const VectorXd& e) {
    std::vector<double> gaps;
    gaps.reserve(e.size());
    for (Eigen::Index i = 0; i + 1 < e.size(); ++i)
        gaps.push_back(e[i + 1] - e[i]);
    if (gaps.empty())
        return 0.0;
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    return gaps[gaps.size() / 2];
}

} // namespace

VectorXd make_eta_grid(double eta_min, double eta_max, int count) {
    if (count < 1)
        throw DomainError("make_eta_grid: count must be >= 1");
    VectorXd g(count);
    if (count == 1) {
        g[0] = eta_min;
        return g;
    }
    const double step = (eta_max - eta_min) / (count - 1);
    for (int i = 0; i < count; ++i)
        g[i] = eta_min + i * step;
    return g;
}

void CharacteristicSamples::validate() const {
    if (etas.size() != values.size())
        throw DimensionError("CharacteristicSamples: size mismatch");
    for (Eigen::Index i = 0; i < etas.size(); ++i) {
        if (std::abs(etas[i]) < 1e-14 && std::abs(values[i] - Complex{1.0, 0.0}) > 1e-10)
            throw ConsistencyError("CharacteristicSamples: Phi(0) differs from 1");
        for (Eigen::Index j = i + 1; j < etas.size(); ++j) {
            if (std::abs(etas[i] + etas[j]) < 1e-12 &&
                std::abs(values[i] - std::conj(values[j])) > 1e-10)
                throw ConsistencyError(
                    "CharacteristicSamples: conjugate symmetry violated");
        }
    }
}

void WorkQuasiDistribution::validate() const {
    if (support.size() != weights.size())
        throw DimensionError("WorkQuasiDistribution: size mismatch");
    if (!std::is_sorted(support.begin(), support.end()))
        throw ConsistencyError("WorkQuasiDistribution: support not ascending");
    if (std::abs(weight_sum() - 1.0) > 1e-10)
        throw ConsistencyError("WorkQuasiDistribution: weights do not sum to 1");
    if (max_imag_residual > 1e-10)
        throw ConsistencyError("WorkQuasiDistribution: imaginary residual beyond 1e-10");
    if (def == WorkDef::TPM && min_weight() < -1e-12)
        throw ConsistencyError("WorkQuasiDistribution: negative TPM weight");
}

double WorkQuasiDistribution::weight_sum() const {
    Kahan k;
    for (double w : weights)
        k.add(w);
    return k.sum;
}

VectorXcd WorkQuasiDistribution::resum(const VectorXd& etas) const {
    VectorXcd out(etas.size());
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < etas.size(); ++i) {
        Kahan re, im;
        for (size_t j = 0; j < support.size(); ++j) {
            re.add(weights[j] * std::cos(etas[i] * support[j]));
            im.add(weights[j] * std::sin(etas[i] * support[j]));
        }
        out[i] = Complex{re.sum, im.sum};
    }
    return out;
}

double WorkQuasiDistribution::exp_average(double beta, double delta_f) const {
    Kahan k;
    for (size_t j = 0; j < support.size(); ++j)
        k.add(weights[j] * std::exp(-beta * (support[j] - delta_f)));
    return k.sum;
}

double WorkQuasiDistribution::min_weight() const {
    double m = weights.empty() ? 0.0 : weights[0];
    for (double w : weights)
        m = std::min(m, w);
    return m;
}

int WorkQuasiDistribution::negativity_count() const {
    int c = 0;
    for (double w : weights)
        if (w < 0.0)
            ++c;
    return c;
}

SpectralContext SpectralContext::build(const DensityMatrix& rho0, const Spectrum& s0,
                                       const Spectrum& st, const FockOperator& u) {
    const int n = rho0.dim();
    if (s0.values.size() != n || st.values.size() != n || u.dim() != n)
        throw DimensionError("SpectralContext: operand dimensions differ");
    const double udef =
        (u.mat.adjoint() * u.mat - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (udef > 1e-8)
        throw ConsistencyError("SpectralContext: propagator is not unitary");
    SpectralContext ctx;
    ctx.e0 = s0.values;
    ctx.et = st.values;
    ctx.v0 = s0.vectors;
    ctx.vt = st.vectors;
    ctx.w = st.vectors.adjoint() * u.mat * s0.vectors;
    ctx.w2 = ctx.w.cwiseAbs2();
    ctx.rho = s0.vectors.adjoint() * rho0.mat * s0.vectors;
    return ctx;
}

SpectralContext SpectralContext::build(const DensityMatrix& rho0, const FockOperator& h0,
                                       const FockOperator& ht, const FockOperator& u) {
    const int n = rho0.dim();
    if (h0.dim() != n || ht.dim() != n)
        throw DimensionError("SpectralContext: operand dimensions differ");
    return build(rho0, spectrum(h0), spectrum(ht), u);
}

CharacteristicSamples characteristic_function(const SpectralContext& ctx, WorkDef def,
                                              const VectorXd& etas) {
    const int n = ctx.dim();
    const VectorXd pdiag = ctx.rho.diagonal().real();
    VectorXcd out(etas.size());

#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index ie = 0; ie < etas.size(); ++ie) {
        const double eta = etas[ie];
        const VectorXcd ephase_t = phase_vector(ctx.et, eta);
        Complex acc{0.0, 0.0};
        switch (def) {
        case WorkDef::TPM: {
            // dephased initial state: only p_n survives the first measurement
            const VectorXcd y =
                pdiag.array().cast<Complex>() * phase_vector(ctx.e0, -eta).array();
            const VectorXcd t = ctx.w2 * y.real().matrix() +
                                kI * (ctx.w2 * y.imag().matrix()).eval().cast<Complex>();
            acc = (ephase_t.array() * t.array()).sum();
            break;
        }
        case WorkDef::FCS: {
            const VectorXcd y = phase_vector(ctx.e0, -0.5 * eta);
            const MatrixXcd b = ctx.w * y.asDiagonal();
            const MatrixXcd d = b * ctx.rho;
            const VectorXcd rowsum = (d.array() * b.array().conjugate()).rowwise().sum();
            acc = (ephase_t.array() * rowsum.array()).sum();
            break;
        }
        case WorkDef::MH: {
            const VectorXcd y = phase_vector(ctx.e0, -eta);
            const MatrixXcd m =
                0.5 * (y.asDiagonal() * ctx.rho + ctx.rho * y.asDiagonal());
            const MatrixXcd d = ctx.w * m;
            const VectorXcd rowsum = (d.array() * ctx.w.array().conjugate()).rowwise().sum();
            acc = (ephase_t.array() * rowsum.array()).sum();
            break;
        }
        default:
            throw DomainError("characteristic_function: unsupported definition");
        }
        out[ie] = acc;
    }
    (void)n;
    CharacteristicSamples cs{def, etas, std::move(out)};
    cs.validate();
    return cs;
}

CharacteristicSamples cf_tpm(const DensityMatrix& rho0, const FockOperator& h0,
                             const FockOperator& ht, const FockOperator& u,
                             const VectorXd& etas) {
    return characteristic_function(SpectralContext::build(rho0, h0, ht, u), WorkDef::TPM,
                                   etas);
}

CharacteristicSamples cf_fcs(const DensityMatrix& rho0, const FockOperator& h0,
                             const FockOperator& ht, const FockOperator& u,
                             const VectorXd& etas) {
    return characteristic_function(SpectralContext::build(rho0, h0, ht, u), WorkDef::FCS,
                                   etas);
}

CharacteristicSamples cf_mh(const DensityMatrix& rho0, const FockOperator& h0,
                            const FockOperator& ht, const FockOperator& u,
                            const VectorXd& etas) {
    return characteristic_function(SpectralContext::build(rho0, h0, ht, u), WorkDef::MH,
                                   etas);
}

double default_merge_tol(const DriveProtocol& p) { return p.quantum() * 1e-6; }

WorkQuasiDistribution quasi_distribution(const SpectralContext& ctx, WorkDef def,
                                         double merge_tol) {
    const int n = ctx.dim();
    if (!(merge_tol > 0.0))
        throw DomainError("quasi_distribution: merge_tol must be positive");
    const double gap = median_gap(ctx.e0);
    if (gap > 0.0 && merge_tol > gap / 10.0)
        throw DomainError("quasi_distribution: merge_tol exceeds level spacing / 10");

    std::vector<double> vals;
    std::vector<Complex> wgts;

    if (def == WorkDef::TPM) {
        const VectorXd pdiag = ctx.rho.diagonal().real();
        vals.reserve(static_cast<size_t>(n) * n);
        wgts.reserve(static_cast<size_t>(n) * n);
        for (int a = 0; a < n; ++a)
            for (int m = 0; m < n; ++m) {
                const double w = pdiag[a] * ctx.w2(m, a);
                if (std::abs(w) < 1e-18)
                    continue;
                vals.push_back(ctx.et[m] - ctx.e0[a]);
                wgts.push_back(Complex{w, 0.0});
            }
    } else if (def == WorkDef::MH) {
        const MatrixXcd g = ctx.w * ctx.rho;
        for (int a = 0; a < n; ++a)
            for (int m = 0; m < n; ++m) {
                // both halves of the Jordan product land on the same support
                const Complex piece = 0.5 * ctx.w(m, a) * std::conj(g(m, a));
                const Complex w = piece + std::conj(piece);
                if (std::abs(w) < 1e-18)
                    continue;
                vals.push_back(ctx.et[m] - ctx.e0[a]);
                wgts.push_back(w);
            }
    } else if (def == WorkDef::FCS) {
        // stage 1: merge the (E0_n + E0_k)/2 half-sums
        std::vector<double> half(static_cast<size_t>(n) * n);
        std::vector<Complex> dummy(half.size(), Complex{1.0, 0.0});
        for (int a = 0; a < n; ++a)
            for (int k = 0; k < n; ++k)
                half[static_cast<size_t>(a) * n + k] = 0.5 * (ctx.e0[a] + ctx.e0[k]);
        std::vector<double> hcopy = half;
        ClusterSet hs = cluster_entries(hcopy, dummy, merge_tol);
        std::vector<int> cid(half.size());
        for (size_t idx = 0; idx < half.size(); ++idx) {
            auto it = std::upper_bound(hs.values.begin(), hs.values.end(), half[idx]);
            int j = static_cast<int>(it - hs.values.begin()) - 1;
            if (j < 0)
                j = 0;
            if (j + 1 < static_cast<int>(hs.values.size()) &&
                std::abs(hs.values[j + 1] - half[idx]) < std::abs(hs.values[j] - half[idx]))
                ++j;
            cid[idx] = j;
        }
        const int nj = static_cast<int>(hs.values.size());
        MatrixXcd b = MatrixXcd::Zero(n, nj);
        for (int a = 0; a < n; ++a)
            for (int k = 0; k < n; ++k) {
                const Complex r = ctx.rho(a, k);
                if (std::abs(r) < 1e-300)
                    continue;
                b.col(cid[static_cast<size_t>(a) * n + k]).array() +=
                    r * (ctx.w.col(a).array() * ctx.w.col(k).array().conjugate());
            }
        for (int j = 0; j < nj; ++j)
            for (int m = 0; m < n; ++m) {
                const Complex w = b(m, j);
                if (std::abs(w) < 1e-18)
                    continue;
                vals.push_back(ctx.et[m] - hs.values[j]);
                wgts.push_back(w);
            }
    } else {
        throw DomainError("quasi_distribution: unsupported definition");
    }

    ClusterSet cs = cluster_entries(vals, wgts, merge_tol);
    WorkQuasiDistribution dist;
    dist.def = def;
    dist.merge_tol = merge_tol;
    for (size_t j = 0; j < cs.values.size(); ++j) {
        const double im = std::abs(cs.weights[j].imag());
        dist.max_imag_residual = std::max(dist.max_imag_residual, im);
        if (im > 1e-8)
            throw ConsistencyError(
                "quasi_distribution: imaginary residual above 1e-8 after pairing");
        const double re = cs.weights[j].real();
        if (std::abs(re) < kWeightFloor)
            continue;
        dist.support.push_back(cs.values[j]);
        dist.weights.push_back(re);
    }
    dist.validate();
    return dist;
}

WorkQuasiDistribution quasi_distribution(const DensityMatrix& rho0, const FockOperator& h0,
                                         const FockOperator& ht, const FockOperator& u,
                                         WorkDef def, double merge_tol) {
    return quasi_distribution(SpectralContext::build(rho0, h0, ht, u), def, merge_tol);
}

std::vector<double> work_moments(const SpectralContext& ctx, WorkDef def, int max_order) {
    if (max_order < 1 || max_order > 4)
        throw DomainError("work_moments: order must be in 1..4");
    const int n = ctx.dim();
    std::vector<Kahan> acc(max_order);
    double imag_resid = 0.0;

    if (def == WorkDef::TPM) {
        const VectorXd pdiag = ctx.rho.diagonal().real();
        for (int a = 0; a < n; ++a)
            for (int m = 0; m < n; ++m) {
                const double wgt = pdiag[a] * ctx.w2(m, a);
                const double om = ctx.et[m] - ctx.e0[a];
                double pw = 1.0;
                for (int j = 0; j < max_order; ++j) {
                    pw *= om;
                    acc[j].add(wgt * pw);
                }
            }
    } else if (def == WorkDef::MH) {
        const MatrixXcd g = ctx.w * ctx.rho;
        for (int a = 0; a < n; ++a)
            for (int m = 0; m < n; ++m) {
                const Complex c = ctx.w(m, a) * std::conj(g(m, a));
                const double om = ctx.et[m] - ctx.e0[a];
                double pw = 1.0;
                for (int j = 0; j < max_order; ++j) {
                    pw *= om;
                    acc[j].add(c.real() * pw);
                    imag_resid = std::max(imag_resid, std::abs(c.imag() * pw));
                }
            }
    } else if (def == WorkDef::FCS) {
        for (int a = 0; a < n; ++a)
            for (int k = 0; k < n; ++k) {
                const Complex r = ctx.rho(a, k);
                if (std::abs(r) < 1e-300)
                    continue;
                const double half = 0.5 * (ctx.e0[a] + ctx.e0[k]);
                for (int m = 0; m < n; ++m) {
                    const Complex t = ctx.w(m, a) * r * std::conj(ctx.w(m, k));
                    const double om = ctx.et[m] - half;
                    double pw = 1.0;
                    for (int j = 0; j < max_order; ++j) {
                        pw *= om;
                        acc[j].add(t.real() * pw);
                    }
                }
            }
    } else {
        throw DomainError("work_moments: unsupported definition");
    }
    if (imag_resid > 1e-8)
        throw ConsistencyError("work_moments: imaginary residual above 1e-8");
    std::vector<double> out(max_order);
    for (int j = 0; j < max_order; ++j)
        out[j] = acc[j].sum;
    return out;
}

DensityMatrix reverse_final_state(const DriveProtocol& p, int steps, int dim) {
    DensityMatrix eq = thermal_state(p, p.duration, dim);
    FockOperator ur = reversed_propagator(p, steps, dim);
    MatrixXcd evolved = ur.mat * eq.mat * ur.mat.adjoint();
    DensityMatrix out{evolved.conjugate().eval()}; // anti-unitary time reversal
    out.validate(false);
    return out;
}

JarzynskiReport jarzynski_check(const DensityMatrix& rho0, const DriveProtocol& p,
                                WorkDef def, int steps, int dim) {
    p.validate();
    const FockOperator h0 = build_hamiltonian(p, 0.0, dim);
    const FockOperator ht = build_hamiltonian(p, p.duration, dim);
    const FockOperator u = propagator(p, 0.0, p.duration, steps, dim);
    const SpectralContext ctx = SpectralContext::build(rho0, h0, ht, u);

    // free energies from the truncated spectra (identical spectra => dF = 0)
    const double e0m = ctx.e0.minCoeff();
    const double etm = ctx.et.minCoeff();
    const double z0 = (-p.beta * (ctx.e0.array() - e0m)).exp().sum();
    const double zt = (-p.beta * (ctx.et.array() - etm)).exp().sum();
    const double delta_f = (etm - e0m) - std::log(zt / z0) / p.beta;

    WorkQuasiDistribution dist = quasi_distribution(ctx, def, default_merge_tol(p));
    const double lhs = dist.exp_average(p.beta, delta_f);

    // reversed-process state, in the H(0) eigenbasis
    const DensityMatrix rrev = reverse_final_state(p, steps, dim);
    const MatrixXcd r = ctx.v0.adjoint() * rrev.mat * ctx.v0;

    VectorXd peq = (-p.beta * (ctx.e0.array() - e0m)).exp();
    peq /= peq.sum();

    // the inverse equilibrium state is used only on its well-conditioned
    // eigenspace; states below the floor must be unpopulated
    const int n = ctx.dim();
    std::vector<int> keep;
    double excluded = 0.0;
    for (int i = 0; i < n; ++i) {
        if (peq[i] >= 1e-14)
            keep.push_back(i);
        else
            excluded += ctx.rho(i, i).real();
    }
    if (excluded > 1e-10)
        throw TruncationError(
            "jarzynski_check: initial state populates levels where the inverse "
            "equilibrium state is ill-conditioned; lower beta or increase dim");

    double rhs = 0.0;
    if (def == WorkDef::TPM) {
        Kahan k;
        for (int i : keep)
            k.add(r(i, i).real() * ctx.rho(i, i).real() / peq[i]);
        rhs = k.sum;
    } else if (def == WorkDef::FCS) {
        Kahan k;
        for (int m : keep)
            for (int a : keep)
                k.add((r(m, a) * ctx.rho(a, m)).real() / std::sqrt(peq[m] * peq[a]));
        rhs = k.sum;
    } else if (def == WorkDef::MH) {
        Kahan k;
        for (int a : keep) {
            Complex row{0.0, 0.0};
            for (int q = 0; q < n; ++q)
                row += ctx.rho(a, q) * r(q, a);
            k.add(row.real() / peq[a]);
        }
        rhs = k.sum;
    } else {
        throw DomainError("jarzynski_check: unsupported definition");
    }

    JarzynskiReport rep;
    rep.definition = def;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.delta_f = delta_f;
    rep.discrepancy = std::abs(lhs - rhs);
    return rep;
}

} // namespace qws
