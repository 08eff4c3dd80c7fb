#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace polyem {

/// Identifier of the random stream layout, stamped into run manifests.
inline constexpr std::string_view kRngScheme =
    "philox4x32-10; key = fmix64(fmix64(seed) ^ golden * (index + 1)); "
    "uniform = 53-bit; normal = marsaglia-polar";

/// 64-bit avalanche permutation (MurmurHash3 finalizer).
std::uint64_t fmix64(std::uint64_t x);

/// Philox4x32-10 block: 128-bit counter, 64-bit key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream with a fixed Gaussian transform.
///
/// Normals come from Marsaglia's polar method on 53-bit uniforms; the second
/// value of each accepted pair is cached. For a given key the sequence is
/// bit-reproducible on any build that uses IEEE double arithmetic.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double normal();

    std::uint64_t key() const { return key_; }

private:
    void refill();

    std::uint64_t key_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Child stream for one Monte Carlo sample. Pure function of its arguments.
RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t sample_index);

/// Fine-grid Wiener increments of one sample.
///
/// increments is time-major: entry (j, i) = step j, component i sits at
/// j * dim + i and is drawn in exactly that order.
struct PathBundle {
    std::uint64_t master_seed = 0;
    std::uint64_t sample_index = 0;
    std::size_t n_ref = 0;
    std::size_t dim = 0;
    std::vector<double> increments;

    double increment(std::size_t step, std::size_t component) const {
        return increments[step * dim + component];
    }
};

bool is_power_of_two(std::size_t n);

/// N(0, 1/n_ref) increments as sqrt(1/n_ref) * Z.
/// Throws std::invalid_argument unless n_ref is a power of two and dim >= 1.
PathBundle sample_fine_increments(std::uint64_t master_seed, std::uint64_t sample_index,
                                  std::size_t n_ref, std::size_t dim);

/// Block sums of the fine increments on n steps (time-major, n x dim).
/// Blocks are summed in ascending index order. Throws std::invalid_argument
/// unless n is a power of two dividing n_ref.
std::vector<double> aggregate(const PathBundle& bundle, std::size_t n);

/// W at every fine node, W(0) = 0, time-major (n_ref + 1) x dim.
std::vector<double> partial_sums(const PathBundle& bundle);

}  // namespace polyem
