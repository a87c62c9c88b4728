#include "slab/matrix_core.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "slab/errors.hpp"
#include "slab/summation.hpp"
#include "slab/tolerances.hpp"

namespace slab {

SchattenIndex::SchattenIndex(double p) : inverse_(0.0) {
    if (std::isnan(p) || p < 1.0) {
        throw DomainError("Schatten exponent must satisfy p >= 1, got " + std::to_string(p));
    }
    inverse_ = std::isinf(p) ? 0.0 : 1.0 / p;
}

SchattenIndex SchattenIndex::from_inverse(double inverse) {
    if (std::isnan(inverse) || inverse < 0.0 || inverse > 1.0) {
        throw DomainError("inverse Schatten exponent must lie in [0, 1], got " + std::to_string(inverse));
    }
    return SchattenIndex(Inverse{inverse});
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entry");
}

namespace {

void require_nonempty(const Matrix& m, const char* what) {
    if (m.rows() == 0 || m.cols() == 0) throw DomainError(std::string(what) + ": empty matrix");
}

// Jacobi is the accurate choice at the sizes the estimators work with; the
// divide-and-conquer solver only pays off on the larger kernel blocks.
constexpr Eigen::Index kJacobiLimit = 48;

}  // namespace

Svd svd(const Matrix& m) {
    require_nonempty(m, "svd");
    require_finite(m, "svd");
    Svd out;
    if (std::min(m.rows(), m.cols()) <= kJacobiLimit) {
        Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.u = solver.matrixU();
        out.s = solver.singularValues();
        out.v = solver.matrixV();
    } else {
        Eigen::BDCSVD<Matrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.u = solver.matrixU();
        out.s = solver.singularValues();
        out.v = solver.matrixV();
    }
    return out;
}

RealVector singular_values(const Matrix& m) {
    require_nonempty(m, "singular_values");
    require_finite(m, "singular_values");
    if (std::min(m.rows(), m.cols()) <= kJacobiLimit) {
        return Eigen::JacobiSVD<Matrix>(m).singularValues();
    }
    return Eigen::BDCSVD<Matrix>(m).singularValues();
}

double schatten_norm_of_values(const RealVector& sigma, SchattenIndex p) {
    if (sigma.size() == 0) return 0.0;
    const double scale = sigma.maxCoeff();
    if (p.is_infinite() || scale == 0.0) return scale;
    CompensatedSum acc;
    if (p.is_one()) {
        for (Eigen::Index i = 0; i < sigma.size(); ++i) acc.add(sigma[i]);
        return acc.value();
    }
    if (p.is_two()) {
        for (Eigen::Index i = 0; i < sigma.size(); ++i) acc.add((sigma[i] / scale) * (sigma[i] / scale));
        return scale * std::sqrt(acc.value());
    }
    const double pp = p.p();
    for (Eigen::Index i = 0; i < sigma.size(); ++i) acc.add(std::pow(sigma[i] / scale, pp));
    return scale * std::pow(acc.value(), p.inverse());
}

double schatten_norm(const Matrix& m, SchattenIndex p) {
    if (p.is_two()) {
        require_nonempty(m, "schatten_norm");
        require_finite(m, "schatten_norm");
        return m.norm();
    }
    return schatten_norm_of_values(singular_values(m), p);
}

double operator_norm(const Matrix& m) { return schatten_norm(m, SchattenIndex::infinity()); }

Complex trace_pairing(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DomainError("trace_pairing: shape mismatch");
    }
    return a.cwiseProduct(b).sum();
}

Matrix adjoint(const Matrix& m) { return m.adjoint(); }
Matrix conj(const Matrix& m) { return m.conjugate(); }
Matrix transpose(const Matrix& m) { return m.transpose(); }

Matrix duality_map(const Matrix& y, SchattenIndex p) { return duality_map(svd(y), p); }

Matrix duality_map(const Svd& d, SchattenIndex p) {
    const double top = d.s.size() ? d.s[0] : 0.0;
    if (top == 0.0) return Matrix::Zero(d.u.rows(), d.v.rows());

    if (p.is_infinite()) return d.u.col(0) * d.v.col(0).adjoint();

    RealVector w(d.s.size());
    if (p.is_one()) {
        const double cutoff = kTol.rank_cutoff * top * static_cast<double>(d.s.size());
        for (Eigen::Index i = 0; i < d.s.size(); ++i) w[i] = d.s[i] > cutoff ? 1.0 : 0.0;
    } else {
        // sigma^(p-1) / ||Y||_p^(p-1), scaled by the top value to avoid overflow.
        const double pm1 = p.p() - 1.0;
        const double norm_scaled = schatten_norm_of_values(d.s / top, p);
        for (Eigen::Index i = 0; i < d.s.size(); ++i) {
            w[i] = std::pow(d.s[i] / top / norm_scaled, pm1);
        }
    }
    return d.u * w.cast<Complex>().asDiagonal() * d.v.adjoint();
}

Matrix norming_functional(const Matrix& m, SchattenIndex p) { return duality_map(m, p).conjugate(); }

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
    return m;
}

Matrix random_unitary(Eigen::Index n, CounterRng& rng) {
    const Matrix g = random_gaussian(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix& r = qr.matrixQR();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Complex d = r(i, i);
        const double ad = std::abs(d);
        if (ad > 0.0) q.col(i) *= d / ad;
    }
    return q;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Matrix matrix_unit(Eigen::Index rows, Eigen::Index cols, Eigen::Index i, Eigen::Index j) {
    Matrix m = Matrix::Zero(rows, cols);
    m(i, j) = 1.0;
    return m;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols) throw DomainError("unvec: length mismatch");
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace slab
