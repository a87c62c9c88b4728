#pragma once

#include <complex>
#include <cstdint>

namespace slab {

/// Counter-based generator: the i-th draw of a stream is a pure function of
/// (key, i), so independent streams can be split off per restart index and
/// consumed in any thread order without changing results.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    /// Independent child stream. Does not advance this generator.
    CounterRng split(std::uint64_t stream) const noexcept;

    std::uint64_t next_u64() noexcept;
    double uniform() noexcept;  // in (0, 1]
    double uniform(double lo, double hi) noexcept;
    std::uint64_t below(std::uint64_t n) noexcept;  // in [0, n)
    double normal() noexcept;
    std::complex<double> complex_normal() noexcept;  // E|z|^2 = 1

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace slab
