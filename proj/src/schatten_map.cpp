#include "slab/schatten_map.hpp"

#include <Eigen/Eigenvalues>
#include <exception>

#include "slab/errors.hpp"

namespace slab {

TwoSidedMap::TwoSidedMap(std::vector<Matrix> left, std::vector<Matrix> right)
    : left_(std::move(left)), right_(std::move(right)) {
    if (left_.empty() || left_.size() != right_.size()) {
        throw DomainError("TwoSidedMap: need the same positive number of left and right factors");
    }
    rows_ = left_[0].rows();
    cols_ = right_[0].rows();
    right_t_.reserve(right_.size());
    for (std::size_t i = 0; i < left_.size(); ++i) {
        if (left_[i].rows() != rows_ || left_[i].cols() != rows_ || right_[i].rows() != cols_ ||
            right_[i].cols() != cols_) {
            throw DomainError("TwoSidedMap: factor shapes disagree");
        }
        right_t_.push_back(right_[i].transpose());
    }
}

Matrix TwoSidedMap::apply(const Matrix& t) const {
    if (t.rows() != rows_ || t.cols() != cols_) throw DomainError("TwoSidedMap::apply: shape mismatch");
    Matrix out = Matrix::Zero(rows_, cols_);
    for (std::size_t i = 0; i < left_.size(); ++i) out.noalias() += left_[i] * t * right_t_[i];
    return out;
}

Matrix TwoSidedMap::hs_adjoint_apply(const Matrix& w) const {
    if (w.rows() != rows_ || w.cols() != cols_) throw DomainError("TwoSidedMap::hs_adjoint_apply: shape mismatch");
    Matrix out = Matrix::Zero(rows_, cols_);
    for (std::size_t i = 0; i < left_.size(); ++i)
        out.noalias() += left_[i].adjoint() * w * right_[i].conjugate();
    return out;
}

TwoSidedMap TwoSidedMap::trace_dual() const {
    std::vector<Matrix> l, r;
    for (std::size_t i = 0; i < left_.size(); ++i) {
        l.push_back(left_[i].transpose());
        r.push_back(right_t_[i]);
    }
    return TwoSidedMap(std::move(l), std::move(r));
}

TwoSidedMap TwoSidedMap::conjugate() const {
    std::vector<Matrix> l, r;
    for (std::size_t i = 0; i < left_.size(); ++i) {
        l.push_back(left_[i].conjugate());
        r.push_back(right_[i].conjugate());
    }
    return TwoSidedMap(std::move(l), std::move(r));
}

Matrix TwoSidedMap::vectorized() const {
    Matrix m = Matrix::Zero(rows_ * cols_, rows_ * cols_);
    for (std::size_t i = 0; i < left_.size(); ++i) m += kron(right_[i], left_[i]);
    return m;
}

namespace {

// Fix the phase so the largest entry is real and positive. Makes witnesses of
// conjugated or transposed problems line up entry by entry.
void normalize_phase(Matrix& m) {
    Eigen::Index bi = 0, bj = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (std::abs(m(i, j)) > best * (1.0 + 1e-12)) {
                best = std::abs(m(i, j));
                bi = i;
                bj = j;
            }
    if (best > 0.0) m *= std::conj(m(bi, bj)) / best;
}

}  // namespace

MapNormResult map_two_norm(const TwoSidedMap& phi) {
    const Matrix m = phi.vectorized();
    const Matrix h = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const Eigen::Index top = h.rows() - 1;
    MapNormResult r;
    r.value = std::sqrt(std::max(es.eigenvalues()[top], 0.0));
    r.witness = unvec(es.eigenvectors().col(top), phi.rows(), phi.cols());
    r.witness /= r.witness.norm();
    normalize_phase(r.witness);
    r.exact = true;
    r.starts = 1;
    return r;
}

AscentResult dual_ascent(const TwoSidedMap& phi, SchattenIndex p, const Matrix& start, int max_iterations,
                         double tolerance) {
    const SchattenIndex q = p.holder();
    AscentResult r;
    const double n0 = schatten_norm(start, p);
    if (!(n0 > 0.0)) {
        r.witness = start;
        return r;
    }
    r.witness = start / n0;
    Svd y = svd(phi.apply(r.witness));
    r.value = schatten_norm_of_values(y.s, p);
    for (int it = 0; it < max_iterations && r.value > 0.0; ++it) {
        const Matrix w = duality_map(y, p);
        const Matrix g = phi.hs_adjoint_apply(w);
        Matrix t = duality_map(g, q);
        Svd yn = svd(phi.apply(t));
        const double vn = schatten_norm_of_values(yn.s, p);
        ++r.iterations;
        if (!(vn > r.value)) {
            r.residual = 0.0;
            break;
        }
        r.residual = (vn - r.value) / vn;
        r.value = vn;
        r.witness = std::move(t);
        y = std::move(yn);
        if (r.residual < tolerance) break;
    }
    return r;
}

std::vector<Matrix> random_start_family(Eigen::Index rows, Eigen::Index cols, int restarts, std::uint64_t seed) {
    const bool square = rows == cols;
    const int family = square ? 4 : 2;
    const int bases = std::max(1, (restarts + family - 1) / family);
    const CounterRng root(seed, 0x5eed);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(bases * family));
    for (int j = 0; j < bases; ++j) {
        CounterRng rng = root.split(static_cast<std::uint64_t>(j));
        Matrix g = random_gaussian(std::min(rows, cols), std::max(rows, cols), rng);
        if (rows > cols) g.transposeInPlace();
        out.push_back(g);
        out.push_back(g.conjugate());
        if (square) {
            out.push_back(g.transpose());
            out.push_back(g.adjoint());
        }
    }
    return out;
}

MapNormResult estimate_map_norm(const TwoSidedMap& phi, SchattenIndex p, const MapNormOptions& options) {
    if (options.restarts < 1) throw DomainError("estimate_map_norm: restarts must be >= 1");
    if (p.is_two()) return map_two_norm(phi);

    const bool dual = p.inverse() < 0.5;
    const SchattenIndex pr = dual ? p.holder() : p;
    const TwoSidedMap work = dual ? phi.trace_dual() : phi;

    const MapNormResult two = map_two_norm(work);
    if (two.value == 0.0) {
        MapNormResult r;
        r.witness = matrix_unit(phi.rows(), phi.cols(), 0, 0);
        r.exact = true;
        return r;
    }

    std::vector<Matrix> starts{two.witness};
    for (const Matrix& t0 : options.warm_starts) {
        if (t0.rows() != phi.rows() || t0.cols() != phi.cols()) {
            throw DomainError("estimate_map_norm: warm start has the wrong shape");
        }
        if (!dual) {
            starts.push_back(t0);
            continue;
        }
        const Matrix y = phi.apply(t0);
        if (y.norm() > 0.0) starts.push_back(norming_functional(y, p));
    }
    for (Matrix& g : random_start_family(phi.rows(), phi.cols(), options.restarts, options.seed))
        starts.push_back(std::move(g));

    const int n = static_cast<int>(starts.size());
    std::vector<AscentResult> runs(starts.size());
    std::vector<std::exception_ptr> errors(starts.size());
#pragma omp parallel for schedule(dynamic) if (options.parallel)
    for (int i = 0; i < n; ++i) {
        try {
            runs[i] = dual_ascent(work, pr, starts[i], options.max_iterations, options.tolerance);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    // First index wins ties, so the reduction does not depend on thread order.
    std::size_t best = 0;
    int total_iterations = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        total_iterations += runs[i].iterations;
        if (runs[i].value > runs[best].value) best = i;
    }

    MapNormResult r;
    r.iterations = total_iterations;
    r.starts = n;
    r.residual = runs[best].residual;
    r.value = runs[best].value;
    if (!dual) {
        r.witness = std::move(runs[best].witness);
        return r;
    }
    // The dual witness S norms Psi(S); the functional norming Psi(S) is a primal
    // unit matrix T with ||Phi(T)||_p >= <S, Phi(T)> = ||Psi(S)||_q.
    Matrix t = norming_functional(work.apply(runs[best].witness), pr);
    const double primal = schatten_norm(phi.apply(t), p);
    r.value = std::max(r.value, primal);
    r.witness = std::move(t);
    return r;
}

}  // namespace slab
