#include "scoopsim/types.hpp"

namespace scoopsim {

static std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = master;
  h = mix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (b + 0xd1b54a32d192ed03ULL));
  h = mix64(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

}  // namespace scoopsim
