#include "slab/product_kernels.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "slab/errors.hpp"

namespace slab {

ProductKernel::ProductKernel(Group g1, int r1, Group g2, int r2) : g1_(g1), g2_(g2), r1_(r1), r2_(r2) {
    if (r1 < 0 || r2 < 0) throw DomainError("kernel radii must be >= 0");
}

Complex ProductKernel::operator()(const Word& s, const Word& t) const {
    auto it = values_.find({s, t});
    return it == values_.end() ? Complex(0.0) : it->second;
}

void ProductKernel::add(const Word& s, const Word& t, Complex c) {
    if (static_cast<int>(s.length()) > r1_ || static_cast<int>(t.length()) > r2_) {
        throw DomainError("kernel entry outside ball(R1) x ball(R2)");
    }
    if (s.max_letter() >= g1_.alphabet() || t.max_letter() >= g2_.alphabet()) {
        throw DomainError("kernel entry uses letters outside the groups");
    }
    if (c == Complex(0.0)) return;
    auto [it, inserted] = values_.try_emplace({s, t}, c);
    if (!inserted) {
        it->second += c;
        if (it->second == Complex(0.0)) values_.erase(it);
    }
}

ProductKernel ProductKernel::scaled(Complex c) const {
    ProductKernel out(g1_, r1_, g2_, r2_);
    for (const auto& [k, v] : values_) out.add(k.first, k.second, c * v);
    return out;
}

ProductKernel ProductKernel::trimmed() const {
    int a = 0, b = 0;
    for (const auto& [k, v] : values_) {
        a = std::max(a, static_cast<int>(k.first.length()));
        b = std::max(b, static_cast<int>(k.second.length()));
    }
    ProductKernel out(g1_, a, g2_, b);
    out.values_ = values_;
    return out;
}

bool operator==(const ProductKernel& a, const ProductKernel& b) {
    return a.group1() == b.group1() && a.group2() == b.group2() && a.radius1() == b.radius1() &&
           a.radius2() == b.radius2() && a.support() == b.support();
}

Matrix kernel_matrix(const ProductKernel& f, std::size_t max_entries) {
    const std::uint64_t rows = f.group1().ball_size(f.radius1());
    const std::uint64_t cols = f.group2().ball_size(f.radius2());
    if (rows * cols > max_entries) throw SizeError("kernel matrix too large to form densely");
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (const auto& [k, v] : f.support()) {
        m(static_cast<Eigen::Index>(ball_index(f.group1(), k.first)),
          static_cast<Eigen::Index>(ball_index(f.group2(), k.second))) = v;
    }
    return m;
}

ProductKernel kernel_from_matrix(Group g1, int r1, Group g2, int r2, const Matrix& m) {
    if (static_cast<std::uint64_t>(m.rows()) != g1.ball_size(r1) ||
        static_cast<std::uint64_t>(m.cols()) != g2.ball_size(r2)) {
        throw DomainError("kernel_from_matrix: shape does not match the balls");
    }
    const std::vector<Word> rows = ball(g1, r1), cols = ball(g2, r2);
    ProductKernel out(g1, r1, g2, r2);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (m(i, j) != Complex(0.0))
                out.add(rows[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)], m(i, j));
    return out;
}

namespace {

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

constexpr std::size_t kMaxBlockEntries = 16'000'000;

}  // namespace

RealVector kernel_singular_values(const ProductKernel& f) {
    // Rows get ids 0..nr-1 and columns nr..; a block is a connected component
    // of the bipartite support graph.
    std::map<std::uint64_t, std::size_t> row_id, col_id;
    for (const auto& [k, v] : f.support()) {
        row_id.try_emplace(ball_index(f.group1(), k.first), row_id.size());
        col_id.try_emplace(ball_index(f.group2(), k.second), col_id.size());
    }
    const std::size_t nr = row_id.size();
    DisjointSets sets(nr + col_id.size());
    for (const auto& [k, v] : f.support())
        sets.unite(row_id[ball_index(f.group1(), k.first)], nr + col_id[ball_index(f.group2(), k.second)]);

    std::map<std::size_t, std::vector<std::size_t>> block_rows, block_cols;
    for (const auto& [key, id] : row_id) block_rows[sets.find(id)].push_back(id);
    for (const auto& [key, id] : col_id) block_cols[sets.find(nr + id)].push_back(id);

    std::map<std::size_t, std::vector<std::pair<std::pair<std::size_t, std::size_t>, Complex>>> entries;
    for (const auto& [k, v] : f.support()) {
        const std::size_t r = row_id[ball_index(f.group1(), k.first)];
        const std::size_t c = col_id[ball_index(f.group2(), k.second)];
        entries[sets.find(r)].push_back({{r, c}, v});
    }

    std::vector<double> sigma;
    for (auto& [root, list] : entries) {
        const auto& br = block_rows[root];
        const auto& bc = block_cols[root];
        if (list.size() == 1 && br.size() == 1 && bc.size() == 1) {
            sigma.push_back(std::abs(list[0].second));
            continue;
        }
        if (br.size() * bc.size() > kMaxBlockEntries) throw SizeError("kernel block too large for a dense SVD");
        std::map<std::size_t, Eigen::Index> rpos, cpos;
        for (std::size_t i = 0; i < br.size(); ++i) rpos[br[i]] = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < bc.size(); ++j) cpos[bc[j]] = static_cast<Eigen::Index>(j);
        Matrix block = Matrix::Zero(static_cast<Eigen::Index>(br.size()), static_cast<Eigen::Index>(bc.size()));
        for (const auto& [rc, v] : list) block(rpos[rc.first], cpos[rc.second]) = v;
        const RealVector s = singular_values(block);
        sigma.insert(sigma.end(), s.data(), s.data() + s.size());
    }
    std::sort(sigma.begin(), sigma.end(), std::greater<>());
    return Eigen::Map<RealVector>(sigma.data(), static_cast<Eigen::Index>(sigma.size()));
}

double kernel_schatten_norm(const ProductKernel& f, SchattenIndex p) {
    if (f.size() == 0) return 0.0;
    return schatten_norm_of_values(kernel_singular_values(f), p);
}

ProductKernel diagonal_lift(const GroupFunction& phi, int radius) {
    ProductKernel out(phi.group(), radius, phi.group(), radius);
    for (const auto& [w, c] : phi.support())
        if (static_cast<int>(w.length()) <= radius) out.add(w, w, c);
    return out;
}

ProductKernel product_phi(Group g1, double t1, int r1, Group g2, double t2, int r2) {
    if (!(t1 > 0.0) || !(t2 > 0.0)) throw DomainError("product_phi needs t > 0");
    ProductKernel out(g1, r1, g2, r2);
    const std::vector<Word> rows = ball(g1, r1), cols = ball(g2, r2);
    for (const Word& s : rows) {
        const double a = std::exp(-t1 * static_cast<double>(s.length()));
        for (const Word& t : cols) out.add(s, t, a * std::exp(-t2 * static_cast<double>(t.length())));
    }
    return out;
}

ProductKernel schur_multiply(const ProductKernel& u, const ProductKernel& f) {
    if (u.group1() != f.group1() || u.group2() != f.group2() || u.radius1() != f.radius1() ||
        u.radius2() != f.radius2()) {
        throw DomainError("schur_multiply: kernels live on different truncations");
    }
    ProductKernel out(f.group1(), f.radius1(), f.group2(), f.radius2());
    for (const auto& [k, v] : f.support()) out.add(k.first, k.second, u(k.first, k.second) * v);
    return out;
}

ProductKernel schur_multiply(const std::function<Complex(const Word&, const Word&)>& u, const ProductKernel& f) {
    ProductKernel out(f.group1(), f.radius1(), f.group2(), f.radius2());
    for (const auto& [k, v] : f.support()) out.add(k.first, k.second, u(k.first, k.second) * v);
    return out;
}

ProductKernel convolve_kernels(const ProductKernel& f, const ProductKernel& g) {
    if (f.group1() != g.group1() || f.group2() != g.group2()) throw DomainError("kernels on different groups");
    ProductKernel::Support acc;
    for (const auto& [a, x] : f.support())
        for (const auto& [b, y] : g.support()) acc[{a.first * b.first, a.second * b.second}] += x * y;
    ProductKernel out(f.group1(), f.radius1() + g.radius1(), f.group2(), f.radius2() + g.radius2());
    for (const auto& [k, v] : acc) out.add(k.first, k.second, v);
    return out.trimmed();
}

ProductKernel kernel_involution(const ProductKernel& f) {
    ProductKernel out(f.group1(), f.radius1(), f.group2(), f.radius2());
    for (const auto& [k, v] : f.support()) out.add(k.first.inverse(), k.second.inverse(), std::conj(v));
    return out;
}

std::optional<std::vector<Complex>> radial_coefficients(const GroupFunction& f) {
    const int r = f.radius();
    std::vector<Complex> coeff(static_cast<std::size_t>(r) + 1, 0.0);
    std::vector<std::uint64_t> count(static_cast<std::size_t>(r) + 1, 0);
    std::vector<bool> seen(static_cast<std::size_t>(r) + 1, false);
    for (const auto& [w, c] : f.support()) {
        const std::size_t n = w.length();
        if (!seen[n]) {
            seen[n] = true;
            coeff[n] = c;
        } else if (coeff[n] != c) {
            return std::nullopt;
        }
        ++count[n];
    }
    for (int n = 0; n <= r; ++n)
        if (seen[static_cast<std::size_t>(n)] && count[static_cast<std::size_t>(n)] != f.group().sphere_size(n))
            return std::nullopt;
    if (f.empty()) coeff.clear();
    return coeff;
}

namespace {

// chi_1 * A in sphere coefficients.
std::vector<Complex> times_chi1(int rank, const std::vector<Complex>& a) {
    const double q = 2.0 * rank;
    std::vector<Complex> out(a.size() + 1, 0.0);
    for (std::size_t m = 0; m < a.size(); ++m) {
        out[m + 1] += a[m];
        if (m == 1) out[0] += q * a[1];
        if (m >= 2) out[m - 1] += (q - 1.0) * a[m];
    }
    return out;
}

std::vector<Complex> axpy(const std::vector<Complex>& x, Complex alpha, const std::vector<Complex>& y) {
    std::vector<Complex> out(std::max(x.size(), y.size()), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += x[i];
    for (std::size_t i = 0; i < y.size(); ++i) out[i] += alpha * y[i];
    return out;
}

}  // namespace

std::vector<Complex> radial_convolve(int rank, const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.empty() || b.empty()) return {};
    const double q = 2.0 * rank;
    // P_n = A * chi_n from chi_1 chi_1 = chi_2 + q chi_0 and
    // chi_1 chi_n = chi_{n+1} + (q-1) chi_{n-1} for n >= 2.
    std::vector<Complex> out(a.size() + b.size() - 1, 0.0);
    std::vector<Complex> prev = a, cur;
    auto accumulate = [&out](Complex coeff, const std::vector<Complex>& p) {
        for (std::size_t i = 0; i < p.size() && i < out.size(); ++i) out[i] += coeff * p[i];
    };
    accumulate(b[0], prev);
    if (b.size() == 1) return out;
    cur = times_chi1(rank, a);
    accumulate(b[1], cur);
    for (std::size_t n = 1; n + 1 < b.size(); ++n) {
        const double back = n == 1 ? q : q - 1.0;
        std::vector<Complex> next = axpy(times_chi1(rank, cur), -back, prev);
        prev = std::move(cur);
        cur = std::move(next);
        accumulate(b[n + 1], cur);
    }
    return out;
}

namespace {

double log_lq_radial(Group g, const std::vector<Complex>& c, SchattenIndex q) {
    double m = 0.0;
    for (const Complex& v : c) m = std::max(m, std::abs(v));
    if (m == 0.0) return -std::numeric_limits<double>::infinity();
    if (q.is_infinite()) return std::log(m);
    double s = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        const double a = std::abs(c[n]) / m;
        if (a > 0.0) s += static_cast<double>(g.sphere_size(static_cast<int>(n))) * std::pow(a, q.p());
    }
    return std::log(m) + q.inverse() * std::log(s);
}

bool diagonal_radial(const ProductKernel& f, GroupFunction& diag) {
    if (f.group1() != f.group2()) return false;
    for (const auto& [k, v] : f.support()) {
        if (k.first != k.second) return false;
        diag.add(k.first, v);
    }
    return radial_coefficients(diag).has_value();
}

}  // namespace

CHHSequence chh_sequence(const ProductKernel& f, SchattenIndex q, int n_max, std::size_t support_cap) {
    if (n_max < 1) throw DomainError("chh_sequence needs n_max >= 1");
    if (f.size() == 0) throw DomainError("chh_sequence: zero kernel");
    CHHSequence out;
    out.q = q;

    GroupFunction diag(f.group1());
    if (diagonal_radial(f, diag)) {
        out.radial_path = true;
        const Group g = f.group1();
        const std::vector<Complex> c = *radial_coefficients(diag);
        std::vector<Complex> c_star(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) c_star[i] = std::conj(c[i]);
        const std::vector<Complex> h = radial_convolve(g.rank(), c_star, c);
        std::vector<Complex> power = h;
        for (int n = 1; n <= n_max; ++n) {
            if (n > 1) power = radial_convolve(g.rank(), power, h);
            const int radius = static_cast<int>(power.size()) - 1;
            out.entries.push_back({n, std::exp(log_lq_radial(g, power, q) / (2.0 * n)), radius, radius});
        }
        return out;
    }

    const ProductKernel h = convolve_kernels(kernel_involution(f), f);
    std::vector<ProductKernel> powers{h};
    for (int n = 2; n <= n_max; ++n) {
        if (powers.back().size() * h.size() > 64 * support_cap) {
            throw SizeError("convolution power " + std::to_string(n) + " would exceed the support cap");
        }
        powers.push_back(convolve_kernels(powers.back(), h));
        if (powers.back().size() > support_cap) {
            throw SizeError("support of power " + std::to_string(n) + " exceeds cap " + std::to_string(support_cap));
        }
    }
    out.entries.resize(powers.size());
    std::vector<std::exception_ptr> errors(powers.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(powers.size()); ++i) {
        try {
            const int n = i + 1;
            const double norm = kernel_schatten_norm(powers[static_cast<std::size_t>(i)], q);
            out.entries[static_cast<std::size_t>(i)] = {n, std::pow(norm, 1.0 / (2.0 * n)),
                                                        powers[static_cast<std::size_t>(i)].radius1(),
                                                        powers[static_cast<std::size_t>(i)].radius2()};
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

GramReport pd_gram_check(Group g, const std::function<Complex(const Word&)>& phi, int radius) {
    const std::vector<Word> words = ball(g, radius);
    const auto n = static_cast<Eigen::Index>(words.size());
    Matrix gram(n, n);
    std::vector<Word> inverses(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) inverses[i] = words[i].inverse();
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            gram(i, j) = phi(inverses[static_cast<std::size_t>(i)] * words[static_cast<std::size_t>(j)]);
    const Matrix herm = 0.5 * (gram + gram.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    return {words.size(), es.eigenvalues()[0], es.eigenvalues()[n - 1]};
}

GramReport pd_gram_check(const GroupFunction& phi, int radius) {
    return pd_gram_check(phi.group(), [&phi](const Word& w) { return phi(w); }, radius);
}

ProductKernel random_kernel(Group g1, int r1, Group g2, int r2, std::size_t terms, CounterRng& rng) {
    ProductKernel out(g1, r1, g2, r2);
    const std::uint64_t n1 = g1.ball_size(r1), n2 = g2.ball_size(r2);
    for (std::size_t i = 0; i < terms; ++i) {
        const Word s = word_at(g1, rng.below(n1));
        const Word t = word_at(g2, rng.below(n2));
        out.add(s, t, rng.complex_normal());
    }
    return out;
}

}  // namespace slab
