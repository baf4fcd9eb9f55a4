#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace l3inv {

/// SplitMix64 finalizer. Bijective on 64-bit words.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x);

/// Independent stream seed for (master, stream, index, attempt). Every random
/// draw in the library is keyed this way so results never depend on call order.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                        std::uint64_t index = 0, std::uint64_t attempt = 0);

namespace streams {
inline constexpr std::uint64_t kDevice = 0x6465766963650001ULL;
inline constexpr std::uint64_t kSplit = 0x73706c6974000002ULL;
inline constexpr std::uint64_t kInit = 0x696e697400000003ULL;
inline constexpr std::uint64_t kShuffle = 0x7368756666000004ULL;
}  // namespace streams

/// mt19937_64 with portable conversions. The std distributions are not
/// bit-reproducible across standard libraries, so they are avoided.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform integer in [0, n), rejection sampled.
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace l3inv
