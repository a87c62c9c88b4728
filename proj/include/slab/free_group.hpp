#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "slab/matrix_core.hpp"

namespace slab {

/// Free group on `rank` generators. Rank 1 is the integers.
class Group {
public:
    static Group free2() noexcept { return Group(2); }
    static Group integers() noexcept { return Group(1); }
    static Group free(int rank);

    int rank() const noexcept { return rank_; }
    int alphabet() const noexcept { return 2 * rank_; }
    std::string name() const;
    /// "F2" or "Z".
    static Group parse(const std::string& name);

    /// 2r (2r - 1)^(n-1) for n >= 1, 1 for n = 0.
    std::uint64_t sphere_size(int n) const;
    std::uint64_t ball_size(int radius) const;

    friend bool operator==(Group a, Group b) noexcept { return a.rank_ == b.rank_; }
    friend bool operator!=(Group a, Group b) noexcept { return a.rank_ != b.rank_; }

private:
    explicit Group(int rank) noexcept : rank_(rank) {}
    int rank_;
};

/// Reduced word. Letter 2i is generator i, 2i+1 its inverse, so the inverse of
/// letter c is c ^ 1 and the letter order is a < a^-1 < b < b^-1.
class Word {
public:
    Word() = default;
    /// Freely reduces the given letter sequence.
    static Word from_letters(std::string_view letters);
    static Word letter(int code);
    static Word integer(long long n);

    std::size_t length() const noexcept { return letters_.size(); }
    bool is_identity() const noexcept { return letters_.empty(); }
    const std::string& letters() const noexcept { return letters_; }
    int max_letter() const noexcept;

    Word inverse() const;
    /// Exponent sum in generator 0; the integer a word stands for in Z.
    long long exponent_sum() const noexcept;

    friend Word operator*(const Word& x, const Word& y);
    /// Length first, then lexicographic in letter order.
    friend bool operator<(const Word& x, const Word& y) noexcept {
        return x.letters_.size() != y.letters_.size() ? x.letters_.size() < y.letters_.size() : x.letters_ < y.letters_;
    }
    friend bool operator==(const Word& x, const Word& y) noexcept { return x.letters_ == y.letters_; }
    friend bool operator!=(const Word& x, const Word& y) noexcept { return !(x == y); }

private:
    std::string letters_;
};

Word mul(const Word& x, const Word& y);
Word inv(const Word& w);
std::size_t length(const Word& w);

/// "e", "a", "aB", ... (capital = inverse) for free groups; decimal integers for Z.
std::string format_word(Group g, const Word& w);
Word parse_word(Group g, const std::string& text);

/// Position of w in the canonical order of ball(g, length(w)).
std::uint64_t ball_index(Group g, const Word& w);
/// Inverse of ball_index.
Word word_at(Group g, std::uint64_t index);
/// All words of length <= radius in canonical (length-lexicographic) order.
std::vector<Word> ball(Group g, int radius);
std::vector<Word> sphere(Group g, int n);

/// Finitely supported function on a free group. Exact zeros are never stored.
class GroupFunction {
public:
    using Support = std::map<Word, Complex>;

    explicit GroupFunction(Group g) : group_(g) {}
    GroupFunction(Group g, Support values);
    static GroupFunction delta(Group g, const Word& w, Complex c = 1.0);

    Group group() const noexcept { return group_; }
    const Support& support() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    Complex operator()(const Word& w) const;
    /// Adds c at w, erasing the entry if the sum is exactly zero.
    void add(const Word& w, Complex c);

    int radius() const noexcept;
    double l1_norm() const;
    double l2_norm() const;
    double lp_norm(SchattenIndex p) const;
    bool is_nonnegative() const;
    GroupFunction scaled(Complex c) const;

private:
    void check_word(const Word& w) const;

    Group group_;
    Support values_;
};

bool operator==(const GroupFunction& f, const GroupFunction& g);

/// (f*g)(s) = sum_t f(t) g(t^-1 s).
GroupFunction convolve(const GroupFunction& f, const GroupFunction& g);
/// Reference implementation: accumulates into an ordered map term by term.
GroupFunction convolve_serial(const GroupFunction& f, const GroupFunction& g);
/// f*(s) = conj(f(s^-1)).
GroupFunction involution(const GroupFunction& f);
GroupFunction add(const GroupFunction& f, const GroupFunction& g);
/// f^{*n}; throws SizeError when an intermediate support exceeds the cap.
GroupFunction convolution_power(const GroupFunction& f, int n, std::size_t support_cap);

/// phi_t(s) = exp(-t length(s)) on ball(radius).
GroupFunction phi_t(Group g, double t, int radius);
/// Sum of the generators and their inverses.
GroupFunction generator_sum(Group g);

struct ThresholdProbe {
    Group group = Group::free2();
    double p = 1.0;
    double t = 0.0;
    double ratio = 0.0;           // (2r-1) exp(-p t), ratio of successive sphere contributions
    double critical_t = 0.0;      // ln(2r-1) / p
    bool convergent = false;      // ratio < 1
    std::vector<double> partial_sums;      // sum over ball(R) of phi_t^p, R = 0..R_max, by enumeration
    std::vector<double> increment_ratios;  // measured sphere(n+1)/sphere(n) contribution ratios, n >= 1
};

ThresholdProbe lp_threshold_probe(Group g, double p, double t, int r_max);

/// Left convolution by f restricted to l^2(ball(R)), as a map into l^2(ball(R + radius f)).
class BallShiftOperator {
public:
    BallShiftOperator(const GroupFunction& f, int radius);

    std::size_t domain_size() const noexcept { return domain_; }
    std::size_t range_size() const noexcept { return range_; }

    /// w = lambda(f) v.
    void apply(const Vector& v, Vector& w, bool parallel = true) const;
    /// u = P lambda(f)^* w, restricted back to the ball.
    void apply_adjoint(const Vector& w, Vector& u, bool parallel = true) const;
    /// Scatter-based reference for apply().
    void apply_serial(const Vector& v, Vector& w) const;

private:
    std::vector<Complex> coeffs_;
    // Interleaved by point: forward_[x * K + k] is the index of s_k x,
    // backward_[y * K + k] the x with s_k x = y or -1.
    std::vector<std::uint32_t> forward_;
    std::vector<std::int32_t> backward_;
    std::size_t domain_ = 0;
    std::size_t range_ = 0;
};

struct ReducedNormEstimate {
    double value = 0.0;  // sqrt of the top Rayleigh quotient of P lambda(f^* f) P
    int iterations = 0;
    double residual = 0.0;
    int radius = 0;
};

/// Lower bound for ||lambda(f)|| by power iteration on ball(R).
ReducedNormEstimate reduced_norm_estimate(const GroupFunction& f, int radius, int max_iterations = 1000,
                                          double tolerance = 1e-10, bool parallel = true);

GroupFunction random_sparse_function(Group g, int radius, std::size_t terms, CounterRng& rng, bool real = false);

}  // namespace slab
