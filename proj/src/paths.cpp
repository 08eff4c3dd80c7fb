#include "polyem/paths.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polyem {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::uint64_t fmix64(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDull;
    x ^= x >> 33;
    x *= 0xC4CEB9FE1A85EC53ull;
    x ^= x >> 33;
    return x;
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t key) : key_(key) {}

void RandomStream::refill() {
    const std::array<std::uint32_t, 4> counter{
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), 0u, 0u};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(key_),
                                           static_cast<std::uint32_t>(key_ >> 32)};
    buffer_ = philox4x32(counter, key);
    ++block_;
    used_ = 0;
}

std::uint64_t RandomStream::next_u64() {
    if (used_ >= 4) {
        refill();
    }
    const std::uint64_t lo = buffer_[static_cast<std::size_t>(used_)];
    const std::uint64_t hi = buffer_[static_cast<std::size_t>(used_) + 1];
    used_ += 2;
    return (hi << 32) | lo;
}

double RandomStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double v1, v2, s;
    do {
        v1 = 2.0 * uniform() - 1.0;
        v2 = 2.0 * uniform() - 1.0;
        s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v2 * scale;
    has_spare_ = true;
    return v1 * scale;
}

RandomStream derive_stream(std::uint64_t master_seed, std::uint64_t sample_index) {
    return RandomStream(fmix64(fmix64(master_seed) ^ (kGolden * (sample_index + 1))));
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

PathBundle sample_fine_increments(std::uint64_t master_seed, std::uint64_t sample_index,
                                  std::size_t n_ref, std::size_t dim) {
    if (!is_power_of_two(n_ref)) {
        throw std::invalid_argument("sample_fine_increments: n_ref must be a power of two, got " +
                                    std::to_string(n_ref));
    }
    if (dim == 0) {
        throw std::invalid_argument("sample_fine_increments: dim must be >= 1");
    }
    PathBundle bundle;
    bundle.master_seed = master_seed;
    bundle.sample_index = sample_index;
    bundle.n_ref = n_ref;
    bundle.dim = dim;
    bundle.increments.resize(n_ref * dim);
    const double scale = std::sqrt(1.0 / static_cast<double>(n_ref));
    RandomStream stream = derive_stream(master_seed, sample_index);
    for (double& dw : bundle.increments) {
        dw = scale * stream.normal();
    }
    return bundle;
}

std::vector<double> aggregate(const PathBundle& bundle, std::size_t n) {
    if (!is_power_of_two(n) || n > bundle.n_ref || bundle.n_ref % n != 0) {
        throw std::invalid_argument("aggregate: grid size " + std::to_string(n) +
                                    " is not a power of two dividing n_ref = " +
                                    std::to_string(bundle.n_ref));
    }
    const std::size_t dim = bundle.dim;
    const std::size_t block = bundle.n_ref / n;
    if (block == 1) {
        return bundle.increments;
    }
    std::vector<double> coarse(n * dim, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < dim; ++i) {
            double sum = 0.0;
            for (std::size_t m = j * block; m < (j + 1) * block; ++m) {
                sum += bundle.increments[m * dim + i];
            }
            coarse[j * dim + i] = sum;
        }
    }
    return coarse;
}

std::vector<double> partial_sums(const PathBundle& bundle) {
    const std::size_t dim = bundle.dim;
    std::vector<double> w((bundle.n_ref + 1) * dim, 0.0);
    for (std::size_t j = 0; j < bundle.n_ref; ++j) {
        for (std::size_t i = 0; i < dim; ++i) {
            w[(j + 1) * dim + i] = w[j * dim + i] + bundle.increments[j * dim + i];
        }
    }
    return w;
}

}  // namespace polyem
