#pragma once

#include <complex>

#include <Eigen/Dense>

#include "qws/errors.hpp"

namespace qws {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Dense operator in the truncated number basis.
struct FockOperator {
    MatrixXcd mat;
    bool hermitian = false;

    FockOperator() = default;
    explicit FockOperator(MatrixXcd m, bool herm = false)
        : mat(std::move(m)), hermitian(herm) {
        if (mat.rows() != mat.cols())
            throw DimensionError("FockOperator: matrix must be square");
        if (hermitian)
            check_hermitian();
    }

    int dim() const { return static_cast<int>(mat.rows()); }

    double hermiticity_defect() const {
        return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
    }

    void check_hermitian() const {
        const double scale = mat.cwiseAbs().maxCoeff();
        if (scale > 0.0 && hermiticity_defect() > 1e-12 * scale)
            throw ConsistencyError("FockOperator: hermitian flag set but A != A^dag");
    }
};

/// Density matrix in the truncated number basis.
struct DensityMatrix {
    MatrixXcd mat;

    DensityMatrix() = default;
    explicit DensityMatrix(MatrixXcd m) : mat(std::move(m)) {
        if (mat.rows() != mat.cols())
            throw DimensionError("DensityMatrix: matrix must be square");
    }

    int dim() const { return static_cast<int>(mat.rows()); }

    double trace_real() const { return mat.trace().real(); }

    /// Checks Hermiticity (1e-12), unit trace (1e-10) and, when
    /// `check_spectrum` is set, positivity (eigenvalues >= -1e-10).
    void validate(bool check_spectrum = false) const;

    /// Tail population sum_{n >= dim-5} rho_nn (basis-diagonal estimate).
    double tail_population() const {
        double s = 0.0;
        for (int n = std::max(0, dim() - 5); n < dim(); ++n)
            s += mat(n, n).real();
        return s;
    }
};

/// Eigen-decomposition of a Hermitian operator, eigenvalues ascending.
struct Spectrum {
    VectorXd values;
    MatrixXcd vectors; // columns are eigenvectors
};

/// Diagonalizes a Hermitian operator with a reconstruction-error gate.
Spectrum spectrum(const FockOperator& op);

/// Spectral function application V f(lambda) V^dag for f = exp(scale * .).
FockOperator herm_exp(const FockOperator& op, Complex scale);

/// Trace distance (1/2) || a - b ||_1 between two density matrices.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

} // namespace qws
