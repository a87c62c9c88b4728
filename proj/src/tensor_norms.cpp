#include "slab/tensor_norms.hpp"

#include <gsl/gsl_multimin.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>

#include "slab/errors.hpp"
#include "slab/tolerances.hpp"

namespace slab {

TensorElement::TensorElement(std::vector<TensorTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw DomainError("TensorElement: term list is empty");
    dim_a_ = terms_[0].a.rows();
    dim_b_ = terms_[0].b.rows();
    if (dim_a_ == 0 || dim_b_ == 0) throw DomainError("TensorElement: empty factor");
    for (const auto& t : terms_) {
        if (t.a.rows() != dim_a_ || t.a.cols() != dim_a_ || t.b.rows() != dim_b_ || t.b.cols() != dim_b_) {
            throw DomainError("TensorElement: factors must be square of one common size per side");
        }
        require_finite(t.a, "TensorElement");
        require_finite(t.b, "TensorElement");
    }
}

TensorElement::TensorElement(Matrix a, Matrix b) : TensorElement(std::vector<TensorTerm>{{std::move(a), std::move(b)}}) {}

TensorElement TensorElement::scaled(Complex c) const {
    std::vector<TensorTerm> t = terms_;
    for (auto& term : t) term.a *= c;
    return TensorElement(std::move(t));
}

const char* to_string(EstimateKind kind) noexcept {
    switch (kind) {
        case EstimateKind::exact: return "exact";
        case EstimateKind::upper_bound: return "upper_bound";
        case EstimateKind::lower_bound: return "lower_bound";
        case EstimateKind::iterate: return "iterate";
    }
    return "iterate";
}

EstimateKind weaker(EstimateKind a, EstimateKind b) noexcept {
    if (a == b) return a;
    if (a == EstimateKind::exact) return b;
    if (b == EstimateKind::exact) return a;
    return EstimateKind::iterate;
}

Matrix pi_apply(const TensorElement& x, const Matrix& t) {
    if (t.rows() != x.dim_a() || t.cols() != x.dim_b()) throw DomainError("pi_apply: T must be d_A x d_B");
    Matrix out = Matrix::Zero(t.rows(), t.cols());
    for (const auto& term : x.terms()) out.noalias() += term.a * t * term.b.transpose();
    return out;
}

Matrix pi_matrix(const TensorElement& x) {
    const Eigen::Index n = x.dim_a() * x.dim_b();
    Matrix m = Matrix::Zero(n, n);
    for (const auto& term : x.terms()) m += kron(term.b, term.a);
    return m;
}

double min_norm(const TensorElement& x) { return operator_norm(pi_matrix(x)); }

TensorElement amplify(const TensorElement& x, int k) {
    if (k < 1) throw DomainError("amplify: k must be >= 1");
    if (k == 1) return x;
    const Matrix id = Matrix::Identity(k, k);
    std::vector<TensorTerm> t;
    t.reserve(x.size());
    for (const auto& term : x.terms()) t.push_back({kron(term.a, id), kron(term.b, id)});
    return TensorElement(std::move(t));
}

TwoSidedMap as_map(const TensorElement& x) {
    std::vector<Matrix> l, r;
    for (const auto& term : x.terms()) {
        l.push_back(term.a);
        r.push_back(term.b);
    }
    return TwoSidedMap(std::move(l), std::move(r));
}

Matrix embed_amplified(const Matrix& t, Eigen::Index dim_a, Eigen::Index dim_b, int k) {
    if (t.rows() != dim_a * k || t.cols() != dim_b * k) throw DomainError("embed_amplified: shape mismatch");
    const Eigen::Index k1 = k + 1;
    Matrix out = Matrix::Zero(dim_a * k1, dim_b * k1);
    for (Eigen::Index j = 0; j < dim_b; ++j)
        for (Eigen::Index s2 = 0; s2 < k; ++s2)
            for (Eigen::Index i = 0; i < dim_a; ++i)
                for (Eigen::Index s = 0; s < k; ++s) out(i * k1 + s, j * k1 + s2) = t(i * k + s, j * k + s2);
    return out;
}

namespace {

void check_options(int k, int restarts) {
    if (k < 1) throw DomainError("amplification k must be >= 1");
    if (restarts < 1) throw DomainError("restarts must be >= 1");
}

// Top right singular vector, as a column.
Vector top_right_singular(const Matrix& m) { return svd(m).v.col(0); }

NormEstimate single_term_norm(const TensorElement& x, int k) {
    const auto& term = x.terms()[0];
    NormEstimate e;
    e.kind = EstimateKind::exact;
    e.value = operator_norm(term.a) * operator_norm(term.b);
    Matrix core = e.value > 0.0 ? Matrix(top_right_singular(term.a) * top_right_singular(term.b).transpose())
                                : matrix_unit(x.dim_a(), x.dim_b(), 0, 0);
    e.witness = kron(core, matrix_unit(k, k, 0, 0));
    return e;
}

}  // namespace

NormEstimate schatten_op_norm(const TensorElement& x, SchattenIndex p, int k, const EstimatorOptions& options) {
    check_options(k, options.restarts);
    if (x.size() == 1) return single_term_norm(x, k);

    MapNormOptions mo;
    mo.restarts = options.restarts;
    mo.seed = options.seed;
    mo.max_iterations = options.max_iterations;
    mo.tolerance = options.tolerance;
    mo.parallel = options.parallel;
    mo.warm_starts = options.warm_starts;
    const MapNormResult r = estimate_map_norm(as_map(amplify(x, k)), p, mo);

    NormEstimate e;
    e.value = r.value;
    e.kind = r.exact ? EstimateKind::exact : EstimateKind::lower_bound;
    e.iterations = r.iterations;
    e.restarts = r.starts;
    e.residual = r.residual;
    e.witness = r.witness;
    return e;
}

std::vector<NormEstimate> amplification_ladder(const TensorElement& x, SchattenIndex p, int k_max,
                                               const EstimatorOptions& options) {
    check_options(k_max, options.restarts);
    std::vector<NormEstimate> out;
    EstimatorOptions level = options;
    for (int k = 1; k <= k_max; ++k) {
        if (k > 1) level.warm_starts = {embed_amplified(out.back().witness, x.dim_a(), x.dim_b(), k - 1)};
        out.push_back(schatten_op_norm(x, p, k, level));
    }
    return out;
}

NormEstimate symmetrized_norm(const TensorElement& x, SchattenIndex p, int k, const EstimatorOptions& options) {
    NormEstimate a = schatten_op_norm(x, p, k, options);
    if (p == p.holder()) return a;
    NormEstimate b = schatten_op_norm(x, p.holder(), k, options);
    const EstimateKind kind = weaker(a.kind, b.kind);
    NormEstimate& best = b.value > a.value ? b : a;
    best.kind = kind;
    best.iterations = a.iterations + b.iterations;
    best.restarts = a.restarts + b.restarts;
    return best;
}

TensorElement adjoint_tensor(const TensorElement& x) {
    std::vector<TensorTerm> t;
    for (const auto& term : x.terms()) t.push_back({term.a.adjoint(), term.b.adjoint()});
    return TensorElement(std::move(t));
}

TensorElement flip(const TensorElement& x) {
    std::vector<TensorTerm> t;
    for (const auto& term : x.terms()) t.push_back({term.b, term.a});
    return TensorElement(std::move(t));
}

TensorElement unitary_conjugate(const TensorElement& x, const Matrix& u, const Matrix& v) {
    if (u.rows() != x.dim_a() || v.rows() != x.dim_b()) throw DomainError("unitary_conjugate: shape mismatch");
    std::vector<TensorTerm> t;
    for (const auto& term : x.terms()) t.push_back({u * term.a * u.adjoint(), v * term.b * v.adjoint()});
    return TensorElement(std::move(t));
}

TensorElement corner_embed(const TensorElement& x, Eigen::Index extra_a, Eigen::Index extra_b) {
    if (extra_a < 0 || extra_b < 0) throw DomainError("corner_embed: negative padding");
    std::vector<TensorTerm> t;
    for (const auto& term : x.terms()) {
        TensorTerm e{Matrix::Zero(x.dim_a() + extra_a, x.dim_a() + extra_a),
                     Matrix::Zero(x.dim_b() + extra_b, x.dim_b() + extra_b)};
        e.a.topLeftCorner(x.dim_a(), x.dim_a()) = term.a;
        e.b.topLeftCorner(x.dim_b(), x.dim_b()) = term.b;
        t.push_back(std::move(e));
    }
    return TensorElement(std::move(t));
}

TensorElement compress(const TensorElement& x, const Matrix& v, const Matrix& w) {
    if (v.rows() != x.dim_a() || w.rows() != x.dim_b()) throw DomainError("compress: shape mismatch");
    std::vector<TensorTerm> t;
    for (const auto& term : x.terms()) t.push_back({v.adjoint() * term.a * v, w.adjoint() * term.b * w});
    return TensorElement(std::move(t));
}

TensorElement minimal_form(const TensorElement& x) {
    const Eigen::Index da = x.dim_a(), db = x.dim_b();
    Matrix realigned = Matrix::Zero(da * da, db * db);
    for (const auto& term : x.terms()) realigned += vec(term.a) * vec(term.b).transpose();
    const Svd d = svd(realigned);
    const double cutoff =
        kTol.rank_cutoff * static_cast<double>(std::max(da * da, db * db)) * (d.s.size() ? d.s[0] : 0.0);
    std::vector<TensorTerm> t;
    for (Eigen::Index i = 0; i < d.s.size(); ++i) {
        if (!(d.s[i] > cutoff)) break;
        const double r = std::sqrt(d.s[i]);
        t.push_back({unvec(r * d.u.col(i), da, da), unvec(r * d.v.col(i).conjugate(), db, db)});
    }
    if (t.empty()) t.push_back({Matrix::Zero(da, da), Matrix::Zero(db, db)});
    return TensorElement(std::move(t));
}

TensorElement multiply(const TensorElement& x, const TensorElement& y) {
    if (x.dim_a() != y.dim_a() || x.dim_b() != y.dim_b()) throw DomainError("multiply: shape mismatch");
    std::vector<TensorTerm> t;
    t.reserve(x.size() * y.size());
    for (const auto& s : x.terms())
        for (const auto& u : y.terms()) t.push_back({s.a * u.a, s.b * u.b});
    return minimal_form(TensorElement(std::move(t)));
}

TensorElement power(const TensorElement& x, int n) {
    if (n < 1) throw DomainError("power: exponent must be >= 1");
    TensorElement out = minimal_form(x);
    const TensorElement base = out;
    for (int i = 1; i < n; ++i) out = multiply(out, base);
    return out;
}

bool is_self_adjoint(const TensorElement& x, double tolerance) {
    const Matrix m = pi_matrix(x);
    const Matrix ms = pi_matrix(adjoint_tensor(x));
    const double scale = std::max(1.0, m.norm());
    return (m - ms).norm() <= tolerance * scale;
}

// ---------------------------------------------------------------------------
// Haagerup norm

namespace {

double top_eigenvalue(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return std::max(es.eigenvalues()[h.rows() - 1], 0.0);
}

// log of the Haagerup objective with the positive factor alpha^* alpha written
// as exp(H)^T for Hermitian H. Parameters are the r^2 real coordinates of H.
class HaagerupProblem {
public:
    explicit HaagerupProblem(const TensorElement& minimal) : r_(static_cast<Eigen::Index>(minimal.size())) {
        const auto& t = minimal.terms();
        for (Eigen::Index i = 0; i < r_; ++i)
            for (Eigen::Index j = 0; j < r_; ++j) {
                aa_.push_back(t[i].a * t[j].a.adjoint());
                bb_.push_back(t[i].b * t[j].b.adjoint());
            }
    }

    Eigen::Index dimension() const noexcept { return r_ * r_; }

    Matrix hermitian(const double* z) const {
        Matrix h(r_, r_);
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < r_; ++i) {
            h(i, i) = z[k++];
            for (Eigen::Index j = i + 1; j < r_; ++j) {
                h(i, j) = Complex(z[k], z[k + 1]);
                h(j, i) = std::conj(h(i, j));
                k += 2;
            }
        }
        return h;
    }

    double log_value(const double* z) const {
        const Matrix h = hermitian(z);
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        const Matrix& v = es.eigenvectors();
        const RealVector& lam = es.eigenvalues();
        const Matrix p = v * lam.array().exp().matrix().cast<Complex>().asDiagonal() * v.adjoint();
        const Matrix pinv_t = (v * (-lam.array()).exp().matrix().cast<Complex>().asDiagonal() * v.adjoint()).transpose();
        Matrix sa = Matrix::Zero(aa_[0].rows(), aa_[0].cols());
        Matrix sb = Matrix::Zero(bb_[0].rows(), bb_[0].cols());
        for (Eigen::Index i = 0; i < r_; ++i)
            for (Eigen::Index j = 0; j < r_; ++j) {
                sa += p(i, j) * aa_[static_cast<std::size_t>(i * r_ + j)];
                sb += pinv_t(i, j) * bb_[static_cast<std::size_t>(i * r_ + j)];
            }
        // Hermitize against rounding before the eigen-solve.
        const double fa = top_eigenvalue(0.5 * (sa + sa.adjoint()));
        const double fb = top_eigenvalue(0.5 * (sb + sb.adjoint()));
        if (!(fa > 0.0) || !(fb > 0.0)) return -std::numeric_limits<double>::infinity();
        return 0.5 * (std::log(fa) + std::log(fb));
    }

private:
    Eigen::Index r_;
    std::vector<Matrix> aa_;
    std::vector<Matrix> bb_;
};

double gsl_trampoline(const gsl_vector* v, void* params) {
    const auto* prob = static_cast<const HaagerupProblem*>(params);
    return prob->log_value(v->data);
}

// Numeric-gradient descent with Armijo backtracking; cheap way to leave a bad
// start before the simplex polish.
double descend(const HaagerupProblem& prob, std::vector<double>& z, int max_iterations) {
    const std::size_t n = z.size();
    double f = prob.log_value(z.data());
    std::vector<double> g(n), trial(n);
    double step = 1.0;
    for (int it = 0; it < max_iterations; ++it) {
        const double h = 1e-6;
        double gg = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double zi = z[i];
            z[i] = zi + h;
            const double fp = prob.log_value(z.data());
            z[i] = zi - h;
            const double fm = prob.log_value(z.data());
            z[i] = zi;
            g[i] = (fp - fm) / (2 * h);
            gg += g[i] * g[i];
        }
        if (gg < 1e-24) break;
        bool moved = false;
        step = std::min(step * 2.0, 4.0);
        while (step > 1e-12) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = z[i] - step * g[i];
            const double ft = prob.log_value(trial.data());
            if (ft <= f - 1e-4 * step * gg) {
                z = trial;
                moved = f - ft > 1e-15 * std::max(1.0, std::abs(f));
                f = ft;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return f;
}

double simplex_polish(const HaagerupProblem& prob, std::vector<double>& z, int rounds) {
    const std::size_t n = z.size();
    double f = prob.log_value(z.data());
    if (n == 0) return f;
    gsl_multimin_function fn{&gsl_trampoline, n, const_cast<HaagerupProblem*>(&prob)};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), &gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(n), &gsl_vector_free);
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
    double size0 = 0.1;
    for (int round = 0; round < rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, z[i]);
        gsl_vector_set_all(ss.get(), size0);
        gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get());
        for (int it = 0; it < 4000; ++it) {
            if (gsl_multimin_fminimizer_iterate(s.get())) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-11) == GSL_SUCCESS) break;
        }
        const double fn_min = s->fval;
        if (fn_min < f) {
            for (std::size_t i = 0; i < n; ++i) z[i] = gsl_vector_get(s->x, i);
            const bool progress = f - fn_min > 1e-14;
            f = fn_min;
            if (!progress) break;
        } else {
            break;
        }
        size0 *= 0.3;
    }
    return f;
}

}  // namespace

double haagerup_objective(const TensorElement& minimal, const Matrix& alpha) {
    const Eigen::Index r = static_cast<Eigen::Index>(minimal.size());
    if (alpha.rows() != r || alpha.cols() != r) throw DomainError("haagerup_objective: alpha must be r x r");
    Eigen::FullPivLU<Matrix> lu(alpha);
    if (!lu.isInvertible()) throw DomainError("haagerup_objective: singular change of basis");
    const Matrix beta = lu.inverse().transpose();
    const auto& t = minimal.terms();
    Matrix sc = Matrix::Zero(minimal.dim_a(), minimal.dim_a());
    Matrix sd = Matrix::Zero(minimal.dim_b(), minimal.dim_b());
    for (Eigen::Index j = 0; j < r; ++j) {
        Matrix c = Matrix::Zero(minimal.dim_a(), minimal.dim_a());
        Matrix d = Matrix::Zero(minimal.dim_b(), minimal.dim_b());
        for (Eigen::Index i = 0; i < r; ++i) {
            c += alpha(j, i) * t[i].a;
            d += beta(j, i) * t[i].b;
        }
        sc += c * c.adjoint();
        sd += d * d.adjoint();
    }
    return std::sqrt(top_eigenvalue(0.5 * (sc + sc.adjoint())) * top_eigenvalue(0.5 * (sd + sd.adjoint())));
}

NormEstimate haagerup_norm(const TensorElement& x, const HaagerupOptions& options) {
    if (options.restarts < 1) throw DomainError("haagerup_norm: restarts must be >= 1");
    const TensorElement m = minimal_form(x);
    NormEstimate e;
    e.kind = EstimateKind::upper_bound;
    if (m.size() == 1) {
        e.kind = EstimateKind::exact;
        e.value = operator_norm(m.terms()[0].a) * operator_norm(m.terms()[0].b);
        return e;
    }
    const HaagerupProblem prob(m);
    const std::size_t n = static_cast<std::size_t>(prob.dimension());
    const CounterRng root(options.seed, 0x4a6f);
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.restarts; ++r) {
        std::vector<double> z(n, 0.0);
        if (r > 0) {
            CounterRng rng = root.split(static_cast<std::uint64_t>(r));
            for (auto& zi : z) zi = rng.normal();
        }
        descend(prob, z, options.max_iterations);
        const double f = simplex_polish(prob, z, 6);
        ++e.restarts;
        best = std::min(best, f);
    }
    e.value = std::exp(best);
    return e;
}

// ---------------------------------------------------------------------------
// Interpolation and sandwich

SchattenIndex interpolate_index(SchattenIndex p0, SchattenIndex p1, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("interpolation parameter must lie in (0, 1)");
    return SchattenIndex::from_inverse((1.0 - theta) * p0.inverse() + theta * p1.inverse());
}

namespace {

// U Sigma^(p/pj) V^* for the unit witness U Sigma V^* at p; unit in S_pj.
Matrix boundary_image(const Matrix& t, SchattenIndex p, SchattenIndex pj) {
    const Svd d = svd(t);
    RealVector s = d.s;
    const double expo = p.inverse() == 0.0 ? 1.0 : pj.inverse() / p.inverse();
    const double cutoff = kTol.rank_cutoff * (s.size() ? s[0] : 0.0);
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = s[i] > cutoff ? std::pow(s[i], expo) : 0.0;
    return d.u * s.cast<Complex>().asDiagonal() * d.v.adjoint();
}

}  // namespace

InterpolationReport verify_interpolation(const TensorElement& x, SchattenIndex p0, SchattenIndex p1, double theta,
                                         int k, const EstimatorOptions& options) {
    InterpolationReport rep{p0, p1, interpolate_index(p0, p1, theta), theta, {}, {}, {}, 0.0, 0.0, false};
    rep.at_p = schatten_op_norm(x, rep.p, k, options);
    const Matrix& t = rep.at_p.witness;
    EstimatorOptions o0 = options, o1 = options;
    if (t.size() > 0 && t.norm() > 0.0) {
        o0.warm_starts.push_back(boundary_image(t, rep.p, p0));
        o1.warm_starts.push_back(boundary_image(t, rep.p, p1));
    }
    rep.at_p0 = schatten_op_norm(x, p0, k, o0);
    rep.at_p1 = schatten_op_norm(x, p1, k, o1);
    rep.rhs = std::pow(rep.at_p0.value, 1.0 - theta) * std::pow(rep.at_p1.value, theta);
    rep.slack = rep.rhs - rep.at_p.value;
    rep.holds = rep.slack >= -kTol.interpolation_slack;
    return rep;
}

SandwichReport max_norm_sandwich(const TensorElement& x, int k, const EstimatorOptions& options) {
    SandwichReport rep{};
    rep.min_norm = min_norm(x);
    rep.at_inf = schatten_op_norm(x, SchattenIndex::infinity(), k, options);
    rep.at_one = schatten_op_norm(x, SchattenIndex::one(), k, options);
    rep.geometric_mean = std::sqrt(rep.at_inf.value * rep.at_one.value);
    rep.symmetrized = std::max(rep.at_inf.value, rep.at_one.value);
    rep.slack_mean = rep.geometric_mean - rep.min_norm;
    rep.slack_symmetrized = rep.symmetrized - rep.min_norm;
    rep.holds = rep.slack_mean >= -kTol.sandwich_slack && rep.slack_symmetrized >= -kTol.sandwich_slack;
    return rep;
}

TensorElement random_tensor(Eigen::Index dim_a, Eigen::Index dim_b, std::size_t terms, CounterRng& rng) {
    std::vector<TensorTerm> t;
    for (std::size_t i = 0; i < terms; ++i) {
        Matrix a = random_gaussian(dim_a, dim_a, rng);
        Matrix b = random_gaussian(dim_b, dim_b, rng);
        t.push_back({std::move(a), std::move(b)});
    }
    return TensorElement(std::move(t));
}

TensorElement random_self_adjoint_tensor(Eigen::Index dim_a, Eigen::Index dim_b, std::size_t terms,
                                         CounterRng& rng) {
    const TensorElement y = random_tensor(dim_a, dim_b, terms, rng);
    std::vector<TensorTerm> t;
    for (const auto& term : y.terms()) {
        t.push_back({0.5 * term.a, term.b});
        t.push_back({0.5 * term.a.adjoint(), term.b.adjoint()});
    }
    return TensorElement(std::move(t));
}

}  // namespace slab
