#include "adbias/seeding.hpp"

namespace adbias {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replication, std::string_view arm, std::string_view purpose,
                          std::uint64_t step) {
    std::uint64_t h = splitmix64(base);
    h = splitmix64(h ^ replication);
    h = splitmix64(h ^ hash_name(arm));
    h = splitmix64(h ^ hash_name(purpose));
    return splitmix64(h ^ step);
}

} // namespace adbias
