#ifndef CMC_RNG_HPP
#define CMC_RNG_HPP

#include <cstdint>

namespace cmc {

// Counter-based random streams for reproducible parallel ensembles.
//
// Each trajectory owns a stream keyed by (master_seed, trajectory_index).
// Draws are addressed by slot number instead of being generated
// sequentially, so a trajectory's randomness is a pure function of
// (seed, index, slot) and results cannot depend on evaluation order,
// scheduling, or thread count.
//
// Construction is fixed and documented because ensembles must reproduce
// bit-for-bit across runs and machines:
//
//   mix(z): the SplitMix64 finalizer
//       z ^= z >> 30;  z *= 0xbf58476d1ce4e5b9;
//       z ^= z >> 27;  z *= 0x94d049bb133111eb;
//       z ^= z >> 31;
//   key     = mix(master_seed + GAMMA) ^ mix(trajectory_index + 2 * GAMMA)
//   bits(j) = mix(key + (j + 1) * GAMMA)
//   GAMMA   = 0x9e3779b97f4a7c15 (the SplitMix64 golden-ratio increment)
//
// uniform(j) maps the top 53 bits of bits(j) onto [0, 1):
//   (bits >> 11) * 2^-53, so 0 is attainable and 1 is not.
//
// Slot assignment used by the engine:
//   0  objective collapse timing (Rule A inverse CDF, or the spontaneous
//      waiting time)
//   1  Born outcome at a spontaneous collapse
//   2  observer measurement
class TrajectoryRng {
public:
    TrajectoryRng(std::uint64_t master_seed, std::uint64_t trajectory_index) noexcept
        : key_(mix(master_seed + kGamma) ^ mix(trajectory_index + 2 * kGamma)) {}

    std::uint64_t bits(std::uint64_t slot) const noexcept {
        return mix(key_ + (slot + 1) * kGamma);
    }

    double uniform(std::uint64_t slot) const noexcept {
        return static_cast<double>(bits(slot) >> 11) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
};

} // namespace cmc

#endif
