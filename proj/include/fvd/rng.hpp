#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace fvd {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The output is a pure function of (seed, stream, position), so independent
/// substreams can be handed to workers in any order and still reproduce the
/// same draws. Distributions are implemented here rather than through
/// <random> so results are identical across standard libraries.
class CounterRng {
  public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    /// Derive an independent stream, e.g. substream(time_index, shot).
    [[nodiscard]] CounterRng substream(std::uint64_t a, std::uint64_t b = 0) const noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Standard normal via Box-Muller.
    double normal() noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

    /// One raw Philox block, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                     std::array<std::uint32_t, 2> key) noexcept;

  private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool have_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// splitmix64 finalizer, used to mix stream identifiers.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

} // namespace fvd
