#pragma once

#include <cstdint>
#include <string_view>

namespace adbias {

std::uint64_t splitmix64(std::uint64_t x);
/// 64-bit FNV-1a.
std::uint64_t hash_name(std::string_view name);

/// Seed of an independent random stream, a stable function of
/// (base seed, replication, arm name, purpose, step). Streams are keyed by arm
/// name, so adding or reordering arms never changes another arm's draws.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication, std::string_view arm, std::string_view purpose,
                          std::uint64_t step = 0);

} // namespace adbias
