#include "qws/operators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qws {

namespace {
constexpr Complex kI{0.0, 1.0};
}

void DensityMatrix::validate(bool check_spectrum) const {
    const double scale = std::max(1.0, mat.cwiseAbs().maxCoeff());
    if ((mat - mat.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ConsistencyError("DensityMatrix: not Hermitian within 1e-12");
    if (std::abs(mat.trace().real() - 1.0) > 1e-10 || std::abs(mat.trace().imag()) > 1e-12)
        throw ConsistencyError("DensityMatrix: trace differs from 1 beyond 1e-10");
    if (check_spectrum) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(mat, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw ConsistencyError("DensityMatrix: negative eigenvalue beyond -1e-10");
    }
}

namespace {

/// Hermitian tridiagonal matrices are rephased to real symmetric tridiagonal
/// form and solved without a dense decomposition.
bool try_spectrum_tridiag(const MatrixXcd& a, Spectrum& out) {
    const int n = static_cast<int>(a.rows());
    if (n < 3)
        return false;
    const double scale = a.cwiseAbs().maxCoeff();
    for (int j = 0; j < n; ++j)
        for (int i = j + 2; i < n; ++i)
            if (std::abs(a(i, j)) > 1e-300 + 0.0 * scale)
                return false;
    VectorXd diag(n), off(n - 1);
    VectorXcd phase(n);
    phase[0] = Complex{1.0, 0.0};
    for (int i = 0; i < n; ++i)
        diag[i] = a(i, i).real();
    for (int i = 0; i + 1 < n; ++i) {
        const Complex u = a(i, i + 1);
        off[i] = std::abs(u);
        phase[i + 1] = off[i] > 0.0 ? phase[i] * std::conj(u) / off[i] : phase[i];
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    es.computeFromTridiagonal(diag, off);
    if (es.info() != Eigen::Success)
        return false;
    out.values = es.eigenvalues();
    out.vectors = phase.asDiagonal() * es.eigenvectors().cast<Complex>();
    return true;
}

} // namespace

Spectrum spectrum(const FockOperator& op) {
    if (!op.hermitian)
        op.check_hermitian(); // tolerate an unset flag, not a non-Hermitian matrix
    Spectrum s;
    if (!try_spectrum_tridiag(op.mat, s)) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(op.mat);
        if (es.info() != Eigen::Success)
            throw AccuracyError("spectrum: eigensolver failed to converge");
        s.values = es.eigenvalues();
        s.vectors = es.eigenvectors();
    }
    const double lam = s.values.cwiseAbs().maxCoeff();
    const MatrixXcd rec = s.vectors * s.values.asDiagonal() * s.vectors.adjoint();
    if (lam > 0.0 && (rec - op.mat).cwiseAbs().maxCoeff() > 1e-10 * lam)
        throw AccuracyError("spectrum: reconstruction error exceeds 1e-10");
    return s;
}

FockOperator herm_exp(const FockOperator& op, Complex scale) {
    Spectrum s = spectrum(op);
    VectorXcd f(s.values.size());
    for (Eigen::Index i = 0; i < f.size(); ++i)
        f[i] = std::exp(scale * s.values[i]);
    MatrixXcd out = s.vectors * f.asDiagonal() * s.vectors.adjoint();
    const bool herm_result = std::abs(scale.imag()) == 0.0;
    return FockOperator(std::move(out), herm_result);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim())
        throw DimensionError("trace_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(a.mat - b.mat, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

std::pair<FockOperator, FockOperator> build_ladder(int dim) {
    if (dim < 2)
        throw DimensionError("build_ladder: dimension must be >= 2");
    MatrixXcd a = MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return {FockOperator(a), FockOperator(a.adjoint().eval())};
}

FockOperator position_operator(const DriveProtocol& p, int dim) {
    auto [a, adag] = build_ladder(dim);
    const double s = std::sqrt(p.hbar / (2.0 * p.mass * p.omega));
    return FockOperator(s * (a.mat + adag.mat), true);
}

FockOperator momentum_operator(const DriveProtocol& p, int dim) {
    auto [a, adag] = build_ladder(dim);
    const double s = std::sqrt(p.mass * p.hbar * p.omega / 2.0);
    return FockOperator(kI * s * (adag.mat - a.mat), true);
}

FockOperator build_hamiltonian(const DriveProtocol& p, double t, int dim) {
    p.validate();
    if (t < -p.pre_time - 1e-12 || t > p.duration + 1e-12)
        throw DomainError("build_hamiltonian: t outside [-pre_time, duration]");
    // project the infinite-dimensional operator: form x^2 and p^2 two levels
    // up, then truncate, so no corner entries are corrupted
    const MatrixXcd x_up = position_operator(p, dim + 2).mat;
    const MatrixXcd p_up = momentum_operator(p, dim + 2).mat;
    const MatrixXcd x2 = (x_up * x_up).topLeftCorner(dim, dim);
    const MatrixXcd p2 = (p_up * p_up).topLeftCorner(dim, dim);
    const MatrixXcd x = x_up.topLeftCorner(dim, dim);
    const double c = p.center(t);
    const double k = 0.5 * p.mass * p.omega * p.omega;
    MatrixXcd h = p2 / (2.0 * p.mass) + k * x2 - 2.0 * k * c * x +
                  k * c * c * MatrixXcd::Identity(dim, dim);
    // symmetrize away matmul roundoff so the hermitian gate is exact
    h = 0.5 * (h + h.adjoint()).eval();
    return FockOperator(std::move(h), true);
}

HamiltonianBands hamiltonian_bands(const DriveProtocol& p, double center, int dim) {
    if (dim < 2)
        throw DimensionError("hamiltonian_bands: dimension must be >= 2");
    HamiltonianBands b;
    b.diag.resize(dim);
    b.off.resize(dim - 1);
    const double q = p.hbar * p.omega;
    const double c2 = 0.5 * p.mass * p.omega * p.omega * center * center;
    for (int n = 0; n < dim; ++n)
        b.diag[n] = q * (n + 0.5) + c2;
    const double xoff = std::sqrt(p.hbar / (2.0 * p.mass * p.omega));
    for (int n = 0; n + 1 < dim; ++n)
        b.off[n] = -p.mass * p.omega * p.omega * center * xoff * std::sqrt(n + 1.0);
    return b;
}

DensityMatrix thermal_state(const DriveProtocol& p, double t, int dim) {
    FockOperator h = build_hamiltonian(p, t, dim);
    Spectrum s = spectrum(h);
    VectorXd w(dim);
    const double e0 = s.values.minCoeff();
    for (int i = 0; i < dim; ++i)
        w[i] = std::exp(-p.beta * (s.values[i] - e0));
    w /= w.sum();
    DensityMatrix rho{(s.vectors * w.cast<Complex>().asDiagonal() * s.vectors.adjoint()).eval()};
    const double tail = rho.tail_population();
    if (tail > 1e-10) {
        const double q = p.beta * p.hbar * p.omega;
        const int needed = dim + static_cast<int>(std::ceil(std::log(tail / 1e-12) / q)) + 8;
        throw TruncationError("thermal_state: tail population " + std::to_string(tail) +
                              " exceeds 1e-10; increase dimension to about " +
                              std::to_string(needed));
    }
    return rho;
}

FockOperator displacement_operator(const DriveProtocol& p, double x0, double p0, int dim) {
    // exp[(i/hbar)(p0 x - x0 p)] = herm_exp(i * G) with Hermitian
    // G = (p0 x - x0 p)/hbar.
    const MatrixXcd x = position_operator(p, dim).mat;
    const MatrixXcd pm = momentum_operator(p, dim).mat;
    FockOperator gen{((p0 * x - x0 * pm) / p.hbar).eval(), true};
    FockOperator d = herm_exp(gen, kI);
    d.hermitian = false;
    return d;
}

DensityMatrix displaced_thermal(const DriveProtocol& p, int dim) {
    DensityMatrix th = thermal_state(p, 0.0, dim);
    if (p.pre_time == 0.0)
        return th;
    FockOperator d = displacement_operator(p, p.coherent_center_x(), p.coherent_center_p(), dim);
    DensityMatrix rho{(d.mat * th.mat * d.mat.adjoint()).eval()};
    const double tail = rho.tail_population();
    if (tail > 1e-10)
        throw TruncationError("displaced_thermal: tail population " + std::to_string(tail) +
                              " exceeds 1e-10; increase dimension");
    return rho;
}

namespace {

/// y = T x for tridiagonal T given by (diag, off), applied to each column.
void tridiag_apply(const VectorXd& diag, const VectorXd& off, const MatrixXcd& x,
                   MatrixXcd& y) {
    const int n = static_cast<int>(diag.size());
    const int cols = static_cast<int>(x.cols());
#pragma omp parallel for schedule(static)
    for (int j = 0; j < cols; ++j) {
        const Complex* xc = x.col(j).data();
        Complex* yc = y.col(j).data();
        if (n == 1) {
            yc[0] = diag[0] * xc[0];
            continue;
        }
        yc[0] = diag[0] * xc[0] + off[0] * xc[1];
        for (int i = 1; i + 1 < n; ++i)
            yc[i] = off[i - 1] * xc[i - 1] + diag[i] * xc[i] + off[i] * xc[i + 1];
        yc[n - 1] = off[n - 2] * xc[n - 2] + diag[n - 1] * xc[n - 1];
    }
}

/// In place: u <- exp(-i H dt / hbar) u with tridiagonal H, via the Chebyshev
/// expansion exp(-i a xi) = sum_k (2 - delta_k0) (-i)^k J_k(a) T_k(xi) on the
/// Gershgorin-bounded spectrum.  Truncated below 1e-17 per coefficient.
void apply_slice_exponential(const HamiltonianBands& h, double dt, double hbar,
                             MatrixXcd& u, MatrixXcd& b0, MatrixXcd& b1, MatrixXcd& b2) {
    const int n = static_cast<int>(h.diag.size());
    double lo = h.diag[0], hi = h.diag[0];
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(h.off[i - 1]);
        if (i + 1 < n) r += std::abs(h.off[i]);
        lo = std::min(lo, h.diag[i] - r);
        hi = std::max(hi, h.diag[i] + r);
    }
    const double b = 0.5 * (hi + lo);
    const double s = std::max(0.5 * (hi - lo) * 1.001, 1e-300);
    const double a = s * dt / hbar;

    VectorXd dg = (h.diag.array() - b) / s;
    VectorXd of = h.off / s;

    // coefficient ladder; J_k(a) dies superexponentially past k ~ a
    std::vector<Complex> coef;
    Complex ik{1.0, 0.0};
    const int kmax = static_cast<int>(a + 80.0 + 0.1 * a);
    for (int k = 0; k <= kmax; ++k) {
        const double jk = std::cyl_bessel_j(k, a);
        coef.push_back((k == 0 ? 1.0 : 2.0) * ik * jk);
        ik *= Complex{0.0, -1.0};
        if (k > a + 4 && std::abs(jk) < 1e-17)
            break;
    }

    const Complex phase = std::exp(Complex{0.0, -b * dt / hbar});
    b0 = u;                     // T_0 U
    tridiag_apply(dg, of, b0, b1); // T_1 U
    MatrixXcd acc = coef[0] * b0;
    if (coef.size() > 1) acc.noalias() += coef[1] * b1;
    for (size_t k = 2; k < coef.size(); ++k) {
        tridiag_apply(dg, of, b1, b2);
        b2 = 2.0 * b2 - b0;
        acc.noalias() += coef[k] * b2;
        b0.swap(b1);
        b1.swap(b2);
    }
    u = phase * acc;
}

} // namespace

FockOperator propagate_linear_center(const DriveProtocol& p, double c0, double cvel,
                                     double t0, double t1, int steps, int dim) {
    p.validate();
    if (!(t0 < t1))
        throw DomainError("propagator: requires t0 < t1");
    if (steps < 1)
        throw DomainError("propagator: requires steps >= 1");
    const double dt = (t1 - t0) / steps;
    MatrixXcd u = MatrixXcd::Identity(dim, dim);
    MatrixXcd b0(dim, dim), b1(dim, dim), b2(dim, dim);
    for (int k = 0; k < steps; ++k) {
        const double tm = t0 + (k + 0.5) * dt;
        const HamiltonianBands h = hamiltonian_bands(p, c0 + cvel * tm, dim);
        apply_slice_exponential(h, dt, p.hbar, u, b0, b1, b2);
    }
    const double defect = (u.adjoint() * u - MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (defect > 1e-8)
        throw AccuracyError("propagator: unitarity defect " + std::to_string(defect) +
                            " exceeds 1e-8; increase steps");
    return FockOperator(std::move(u));
}

FockOperator propagator(const DriveProtocol& p, double t0, double t1, int steps, int dim) {
    if (t0 < -p.pre_time - 1e-12 || t1 > p.duration + 1e-12)
        throw DomainError("propagator: [t0, t1] outside [-pre_time, duration]");
    return propagate_linear_center(p, 0.0, p.drag_speed, t0, t1, steps, dim);
}

FockOperator reversed_propagator(const DriveProtocol& p, int steps, int dim) {
    // H^R(t) = H(tau - t): well center u tau - u t
    return propagate_linear_center(p, p.drag_speed * p.duration, -p.drag_speed,
                                   0.0, p.duration, steps, dim);
}

Spectrum spectrum_banded(const HamiltonianBands& bands) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es;
    es.computeFromTridiagonal(bands.diag, bands.off);
    if (es.info() != Eigen::Success)
        throw AccuracyError("spectrum_banded: eigensolver failed to converge");
    return Spectrum{es.eigenvalues(), es.eigenvectors().cast<Complex>()};
}

int choose_dimension(const DriveProtocol& p) {
    p.validate();
    const double q = p.beta * p.hbar * p.omega;
    const double x0 = p.coherent_center_x();
    const double p0 = p.coherent_center_p();
    const double alpha2 = (p.mass * p.omega * x0 * x0 + p0 * p0 / (p.mass * p.omega)) /
                          (2.0 * p.hbar);
    const double nbar = 1.0 / std::expm1(q) + alpha2;
    double n = 28.0 / q + 2.0 * alpha2 + 10.0 * std::sqrt(nbar + 1.0) + 10.0;
    return std::max(32, static_cast<int>(std::ceil(n)));
}

} // namespace qws
