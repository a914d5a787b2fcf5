#pragma once

#include <cstdint>
#include <initializer_list>

namespace vsp {

// Mixes a base seed with a list of stream tags (iteration, region, ...) into
// an independent 64-bit seed. Every random stream in the library is derived
// this way so results do not depend on call order or thread scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept;

}  // namespace vsp
