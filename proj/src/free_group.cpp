#include "slab/free_group.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "slab/errors.hpp"
#include "slab/summation.hpp"

namespace slab {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint64_t kEnumerationCap = 20'000'000;

// Blocked sum of |v_i|^2: the block partition is fixed, so the result does not
// depend on the number of threads.
double squared_norm(const Vector& v, bool parallel) {
    constexpr Eigen::Index kBlock = 4096;
    const Eigen::Index n = v.size();
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static) if (parallel)
    for (Eigen::Index b = 0; b < blocks; ++b) {
        const Eigen::Index lo = b * kBlock, hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (Eigen::Index i = lo; i < hi; ++i) s += std::norm(v[i]);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// Group

Group Group::free(int rank) {
    if (rank < 1 || rank > 8) throw DomainError("free group rank must be in [1, 8]");
    return Group(rank);
}

std::string Group::name() const { return rank_ == 1 ? "Z" : "F" + std::to_string(rank_); }

Group Group::parse(const std::string& name) {
    if (name == "Z") return integers();
    if (name.size() >= 2 && name[0] == 'F') {
        try {
            return free(std::stoi(name.substr(1)));
        } catch (const std::logic_error&) {
        }
    }
    throw DomainError("unknown group '" + name + "' (expected Z or F2)");
}

std::uint64_t Group::sphere_size(int n) const {
    if (n < 0) throw DomainError("sphere radius must be >= 0");
    if (n == 0) return 1;
    std::uint64_t s = static_cast<std::uint64_t>(alphabet());
    for (int i = 1; i < n; ++i) s *= static_cast<std::uint64_t>(alphabet() - 1);
    return s;
}

std::uint64_t Group::ball_size(int radius) const {
    if (radius < 0) throw DomainError("ball radius must be >= 0");
    std::uint64_t total = 0;
    for (int n = 0; n <= radius; ++n) total += sphere_size(n);
    return total;
}

// ---------------------------------------------------------------------------
// Word

Word Word::from_letters(std::string_view letters) {
    Word w;
    for (char c : letters) {
        if (static_cast<unsigned char>(c) >= 16) throw DomainError("letter code out of range");
        if (!w.letters_.empty() && w.letters_.back() == (c ^ 1)) {
            w.letters_.pop_back();
        } else {
            w.letters_.push_back(c);
        }
    }
    return w;
}

Word Word::letter(int code) {
    if (code < 0 || code >= 16) throw DomainError("letter code out of range");
    Word w;
    w.letters_.push_back(static_cast<char>(code));
    return w;
}

Word Word::integer(long long n) {
    Word w;
    w.letters_.assign(static_cast<std::size_t>(n < 0 ? -n : n), n < 0 ? char{1} : char{0});
    return w;
}

int Word::max_letter() const noexcept {
    int m = -1;
    for (char c : letters_) m = std::max(m, static_cast<int>(c));
    return m;
}

Word Word::inverse() const {
    Word w;
    w.letters_.resize(letters_.size());
    for (std::size_t i = 0; i < letters_.size(); ++i) w.letters_[i] = letters_[letters_.size() - 1 - i] ^ 1;
    return w;
}

long long Word::exponent_sum() const noexcept {
    long long s = 0;
    for (char c : letters_)
        if (c == 0) ++s;
        else if (c == 1) --s;
    return s;
}

Word operator*(const Word& x, const Word& y) {
    // Cancel the longest suffix of x against the prefix of y.
    std::size_t k = 0;
    const std::size_t nx = x.letters_.size(), ny = y.letters_.size();
    while (k < nx && k < ny && x.letters_[nx - 1 - k] == (y.letters_[k] ^ 1)) ++k;
    Word w;
    w.letters_.reserve(nx + ny - 2 * k);
    w.letters_.append(x.letters_, 0, nx - k);
    w.letters_.append(y.letters_, k, std::string::npos);
    return w;
}

Word mul(const Word& x, const Word& y) { return x * y; }
Word inv(const Word& w) { return w.inverse(); }
std::size_t length(const Word& w) { return w.length(); }

std::string format_word(Group g, const Word& w) {
    if (g.rank() == 1) return std::to_string(w.exponent_sum());
    if (w.is_identity()) return "e";
    std::string s;
    for (char c : w.letters()) {
        const char base = static_cast<char>('a' + (c >> 1));
        s.push_back((c & 1) ? static_cast<char>(std::toupper(base)) : base);
    }
    return s;
}

Word parse_word(Group g, const std::string& text) {
    if (g.rank() == 1) {
        std::size_t pos = 0;
        long long n = 0;
        try {
            n = std::stoll(text, &pos);
        } catch (const std::logic_error&) {
            throw DomainError("not an integer: '" + text + "'");
        }
        if (pos != text.size()) throw DomainError("not an integer: '" + text + "'");
        return Word::integer(n);
    }
    if (text == "e") return Word{};
    std::string letters;
    for (char ch : text) {
        const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        const int gen = lower - 'a';
        if (gen < 0 || gen >= g.rank()) throw DomainError("bad letter '" + std::string(1, ch) + "' for " + g.name());
        letters.push_back(static_cast<char>(2 * gen + (std::isupper(static_cast<unsigned char>(ch)) ? 1 : 0)));
    }
    return Word::from_letters(letters);
}

std::uint64_t ball_index(Group g, const Word& w) {
    const std::size_t n = w.length();
    if (n == 0) return 0;
    if (w.max_letter() >= g.alphabet()) throw DomainError("word uses letters outside the group");
    const auto& s = w.letters();
    const std::uint64_t branch = static_cast<std::uint64_t>(g.alphabet() - 1);
    std::uint64_t rank = static_cast<std::uint64_t>(s[0]);
    for (std::size_t i = 1; i < n; ++i) {
        const char forbidden = s[i - 1] ^ 1;
        const std::uint64_t d = static_cast<std::uint64_t>(s[i] < forbidden ? s[i] : s[i] - 1);
        rank = rank * branch + d;
    }
    return g.ball_size(static_cast<int>(n) - 1) + rank;
}

Word word_at(Group g, std::uint64_t index) {
    if (index == 0) return Word{};
    int n = 1;
    std::uint64_t below = 1;
    while (below + g.sphere_size(n) <= index) below += g.sphere_size(n++);
    std::uint64_t rank = index - below;
    const std::uint64_t branch = static_cast<std::uint64_t>(g.alphabet() - 1);
    std::vector<int> digits(static_cast<std::size_t>(n));
    for (int i = n - 1; i >= 1; --i) {
        digits[static_cast<std::size_t>(i)] = static_cast<int>(rank % branch);
        rank /= branch;
    }
    digits[0] = static_cast<int>(rank);
    std::string letters(static_cast<std::size_t>(n), '\0');
    letters[0] = static_cast<char>(digits[0]);
    for (int i = 1; i < n; ++i) {
        const int forbidden = letters[static_cast<std::size_t>(i - 1)] ^ 1;
        const int d = digits[static_cast<std::size_t>(i)];
        letters[static_cast<std::size_t>(i)] = static_cast<char>(d < forbidden ? d : d + 1);
    }
    return Word::from_letters(letters);
}

std::vector<Word> ball(Group g, int radius) {
    if (radius < 0) throw DomainError("ball radius must be >= 0");
    const std::uint64_t total = g.ball_size(radius);
    if (total > kEnumerationCap) throw SizeError("ball too large to enumerate: " + std::to_string(total));
    std::vector<Word> out;
    out.reserve(static_cast<std::size_t>(total));
    out.emplace_back();
    std::size_t sphere_begin = 0;
    for (int n = 1; n <= radius; ++n) {
        const std::size_t sphere_end = out.size();
        for (std::size_t i = sphere_begin; i < sphere_end; ++i) {
            for (int c = 0; c < g.alphabet(); ++c) {
                const Word& w = out[i];
                if (!w.is_identity() && w.letters().back() == (c ^ 1)) continue;
                out.push_back(w * Word::letter(c));
            }
        }
        sphere_begin = sphere_end;
    }
    return out;
}

std::vector<Word> sphere(Group g, int n) {
    std::vector<Word> b = ball(g, n);
    const std::size_t start = n == 0 ? 0 : static_cast<std::size_t>(g.ball_size(n - 1));
    return {b.begin() + static_cast<std::ptrdiff_t>(start), b.end()};
}

// ---------------------------------------------------------------------------
// GroupFunction

GroupFunction::GroupFunction(Group g, Support values) : group_(g) {
    for (auto& [w, c] : values) {
        check_word(w);
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw DomainError("non-finite function value");
        if (c != Complex(0.0)) values_.emplace(w, c);
    }
}

GroupFunction GroupFunction::delta(Group g, const Word& w, Complex c) {
    GroupFunction f(g);
    f.add(w, c);
    return f;
}

void GroupFunction::check_word(const Word& w) const {
    if (w.max_letter() >= group_.alphabet()) throw DomainError("word uses letters outside " + group_.name());
}

Complex GroupFunction::operator()(const Word& w) const {
    auto it = values_.find(w);
    return it == values_.end() ? Complex(0.0) : it->second;
}

void GroupFunction::add(const Word& w, Complex c) {
    check_word(w);
    if (c == Complex(0.0)) return;
    auto [it, inserted] = values_.try_emplace(w, c);
    if (!inserted) {
        it->second += c;
        if (it->second == Complex(0.0)) values_.erase(it);
    }
}

int GroupFunction::radius() const noexcept {
    int r = 0;
    for (const auto& [w, c] : values_) r = std::max(r, static_cast<int>(w.length()));
    return r;
}

double GroupFunction::l1_norm() const {
    CompensatedSum s;
    for (const auto& [w, c] : values_) s.add(std::abs(c));
    return s.value();
}

double GroupFunction::l2_norm() const {
    CompensatedSum s;
    for (const auto& [w, c] : values_) s.add(std::norm(c));
    return std::sqrt(s.value());
}

double GroupFunction::lp_norm(SchattenIndex p) const {
    if (p.is_one()) return l1_norm();
    if (p.is_two()) return l2_norm();
    double m = 0.0;
    for (const auto& [w, c] : values_) m = std::max(m, std::abs(c));
    if (p.is_infinite() || m == 0.0) return m;
    CompensatedSum s;
    for (const auto& [w, c] : values_) s.add(std::pow(std::abs(c) / m, p.p()));
    return m * std::pow(s.value(), p.inverse());
}

bool GroupFunction::is_nonnegative() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](const auto& kv) { return kv.second.imag() == 0.0 && kv.second.real() >= 0.0; });
}

GroupFunction GroupFunction::scaled(Complex c) const {
    GroupFunction out(group_);
    for (const auto& [w, v] : values_) out.add(w, c * v);
    return out;
}

bool operator==(const GroupFunction& f, const GroupFunction& g) {
    return f.group() == g.group() && f.support() == g.support();
}

namespace {

void require_same_group(const GroupFunction& f, const GroupFunction& g) {
    if (f.group() != g.group()) throw DomainError("functions live on different groups");
}

struct Product {
    Word key;
    Complex value;
};

}  // namespace

GroupFunction convolve_serial(const GroupFunction& f, const GroupFunction& g) {
    require_same_group(f, g);
    std::map<Word, Complex> acc;
    for (const auto& [s, a] : f.support())
        for (const auto& [t, b] : g.support()) acc[s * t] += a * b;
    std::erase_if(acc, [](const auto& kv) { return kv.second == Complex(0.0); });
    return GroupFunction(f.group(), std::move(acc));
}

GroupFunction convolve(const GroupFunction& f, const GroupFunction& g) {
    require_same_group(f, g);
    std::vector<std::pair<Word, Complex>> fe(f.support().begin(), f.support().end());
    std::vector<std::pair<Word, Complex>> ge(g.support().begin(), g.support().end());
    const std::size_t nf = fe.size(), ng = ge.size();
    std::vector<Product> prods(nf * ng);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(nf); ++i)
        for (std::size_t j = 0; j < ng; ++j) {
            auto& p = prods[static_cast<std::size_t>(i) * ng + j];
            p.key = fe[static_cast<std::size_t>(i)].first * ge[j].first;
            p.value = fe[static_cast<std::size_t>(i)].second * ge[j].second;
        }
    // Stable: equal keys keep the (i, j) order, so each sum is formed in the
    // same order as in convolve_serial and the results agree bit for bit.
    std::stable_sort(prods.begin(), prods.end(), [](const Product& a, const Product& b) { return a.key < b.key; });
    GroupFunction::Support out;
    auto hint = out.end();
    for (std::size_t i = 0; i < prods.size();) {
        Complex acc(0.0);
        std::size_t j = i;
        for (; j < prods.size() && prods[j].key == prods[i].key; ++j) acc += prods[j].value;
        if (acc != Complex(0.0)) hint = out.emplace_hint(hint, std::move(prods[i].key), acc);
        i = j;
    }
    return GroupFunction(f.group(), std::move(out));
}

GroupFunction involution(const GroupFunction& f) {
    GroupFunction out(f.group());
    for (const auto& [w, c] : f.support()) out.add(w.inverse(), std::conj(c));
    return out;
}

GroupFunction add(const GroupFunction& f, const GroupFunction& g) {
    require_same_group(f, g);
    GroupFunction out = f;
    for (const auto& [w, c] : g.support()) out.add(w, c);
    return out;
}

GroupFunction convolution_power(const GroupFunction& f, int n, std::size_t support_cap) {
    if (n < 1) throw DomainError("convolution power must be >= 1");
    GroupFunction out = f;
    for (int i = 1; i < n; ++i) {
        if (out.size() * f.size() > 64 * support_cap) {
            throw SizeError("convolution power " + std::to_string(i + 1) + " would exceed the support cap");
        }
        out = convolve(out, f);
        if (out.size() > support_cap) {
            throw SizeError("support of power " + std::to_string(i + 1) + " exceeds cap " +
                            std::to_string(support_cap));
        }
    }
    return out;
}

GroupFunction phi_t(Group g, double t, int radius) {
    if (!(t > 0.0)) throw DomainError("phi_t needs t > 0");
    GroupFunction out(g);
    for (const Word& w : ball(g, radius)) out.add(w, std::exp(-t * static_cast<double>(w.length())));
    return out;
}

GroupFunction generator_sum(Group g) {
    GroupFunction out(g);
    for (int c = 0; c < g.alphabet(); ++c) out.add(Word::letter(c), 1.0);
    return out;
}

ThresholdProbe lp_threshold_probe(Group g, double p, double t, int r_max) {
    if (!(p >= 1.0) || std::isinf(p)) throw DomainError("threshold probe needs p in [1, inf)");
    if (!(t > 0.0)) throw DomainError("threshold probe needs t > 0");
    if (r_max < 2) throw DomainError("threshold probe needs R_max >= 2");
    ThresholdProbe out;
    out.group = g;
    out.p = p;
    out.t = t;
    const double branch = static_cast<double>(g.alphabet() - 1);
    out.ratio = branch * std::exp(-p * t);
    out.critical_t = std::log(branch) / p;
    out.convergent = out.ratio < 1.0;

    const GroupFunction phi = phi_t(g, t, r_max);
    std::vector<CompensatedSum> spheres(static_cast<std::size_t>(r_max) + 1);
    for (const auto& [w, c] : phi.support()) spheres[w.length()].add(std::pow(std::abs(c), p));
    CompensatedSum total;
    for (int n = 0; n <= r_max; ++n) {
        total.add(spheres[static_cast<std::size_t>(n)].value());
        out.partial_sums.push_back(total.value());
    }
    for (int n = 1; n < r_max; ++n) {
        out.increment_ratios.push_back(spheres[static_cast<std::size_t>(n + 1)].value() /
                                       spheres[static_cast<std::size_t>(n)].value());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shifts on balls

BallShiftOperator::BallShiftOperator(const GroupFunction& f, int radius) {
    if (f.empty()) throw DomainError("BallShiftOperator: zero function");
    if (radius < f.radius()) throw DomainError("ball radius smaller than the support radius of f");
    const Group g = f.group();
    const std::vector<Word> words = ball(g, radius);
    const std::uint64_t range = g.ball_size(radius + f.radius());
    if (range >= static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max())) {
        throw SizeError("ball too large for 32-bit indices");
    }
    domain_ = words.size();
    range_ = static_cast<std::size_t>(range);
    std::vector<Word> shifts;
    for (const auto& [s, c] : f.support()) {
        coeffs_.push_back(c);
        shifts.push_back(s);
    }
    const std::size_t kk = shifts.size();
    forward_.resize(domain_ * kk);
    backward_.assign(range_ * kk, -1);
#pragma omp parallel for schedule(static)
    for (std::int64_t x = 0; x < static_cast<std::int64_t>(domain_); ++x)
        for (std::size_t k = 0; k < kk; ++k)
            forward_[static_cast<std::size_t>(x) * kk + k] =
                static_cast<std::uint32_t>(ball_index(g, shifts[k] * words[static_cast<std::size_t>(x)]));
    for (std::size_t x = 0; x < domain_; ++x)
        for (std::size_t k = 0; k < kk; ++k) backward_[forward_[x * kk + k] * kk + k] = static_cast<std::int32_t>(x);
}

void BallShiftOperator::apply(const Vector& v, Vector& w, bool parallel) const {
    const std::size_t kk = coeffs_.size();
    w.resize(static_cast<Eigen::Index>(range_));
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t y = 0; y < static_cast<std::int64_t>(range_); ++y) {
        Complex acc(0.0);
        const std::int32_t* row = backward_.data() + static_cast<std::size_t>(y) * kk;
        for (std::size_t k = 0; k < kk; ++k)
            if (row[k] >= 0) acc += coeffs_[k] * v[row[k]];
        w[y] = acc;
    }
}

void BallShiftOperator::apply_serial(const Vector& v, Vector& w) const {
    const std::size_t kk = coeffs_.size();
    w.setZero(static_cast<Eigen::Index>(range_));
    for (std::size_t k = 0; k < kk; ++k)
        for (std::size_t x = 0; x < domain_; ++x)
            w[forward_[x * kk + k]] += coeffs_[k] * v[static_cast<Eigen::Index>(x)];
}

void BallShiftOperator::apply_adjoint(const Vector& w, Vector& u, bool parallel) const {
    const std::size_t kk = coeffs_.size();
    u.resize(static_cast<Eigen::Index>(domain_));
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t x = 0; x < static_cast<std::int64_t>(domain_); ++x) {
        Complex acc(0.0);
        const std::uint32_t* row = forward_.data() + static_cast<std::size_t>(x) * kk;
        for (std::size_t k = 0; k < kk; ++k) acc += std::conj(coeffs_[k]) * w[row[k]];
        u[x] = acc;
    }
}

ReducedNormEstimate reduced_norm_estimate(const GroupFunction& f, int radius, int max_iterations, double tolerance,
                                          bool parallel) {
    if (radius < 0) throw DomainError("radius must be >= 0");
    if (radius < f.radius()) throw DomainError("R too small: must be at least the support radius of f");
    ReducedNormEstimate out;
    out.radius = radius;
    if (f.empty()) return out;
    const BallShiftOperator op(f, radius);
    Vector v = Vector::Constant(static_cast<Eigen::Index>(op.domain_size()),
                                1.0 / std::sqrt(static_cast<double>(op.domain_size())));
    Vector w, u;
    double value = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        op.apply(v, w, parallel);
        const double rq = squared_norm(w, parallel);
        ++out.iterations;
        const double increment = value > 0.0 ? (rq - value) / rq : 1.0;
        if (rq > value) value = rq;
        out.residual = increment;
        if (it > 0 && increment < tolerance) break;
        op.apply_adjoint(w, u, parallel);
        const double nu = std::sqrt(squared_norm(u, parallel));
        if (nu == 0.0) break;
        v = u / nu;
    }
    out.value = std::sqrt(value);
    return out;
}

GroupFunction random_sparse_function(Group g, int radius, std::size_t terms, CounterRng& rng, bool real) {
    GroupFunction out(g);
    const std::uint64_t n = g.ball_size(radius);
    for (std::size_t i = 0; i < terms; ++i) {
        const Word w = word_at(g, rng.below(n));
        const Complex c = real ? Complex(rng.normal(), 0.0) : rng.complex_normal();
        out.add(w, c);
    }
    return out;
}

}  // namespace slab
