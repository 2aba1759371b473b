#pragma once

#include <cstdint>
#include <random>

namespace otfs {

// splitmix64 finalizer, used to derive independent-looking substream seeds
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream-splitting rule: every consumer seeds an mt19937_64 with
// mix(base ^ mix(stream_id)).  stream_id encodes (purpose, trial, sweep index)
// so no two stages of a run share a stream.
inline std::mt19937_64 make_rng(std::uint64_t base_seed, std::uint64_t stream_id) {
    return std::mt19937_64(mix_seed(base_seed ^ mix_seed(stream_id)));
}

} // namespace otfs
