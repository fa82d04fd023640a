#pragma once

#include <cstdint>

namespace softcache {

// Dense, contiguous indices. A catalog of K contents uses ids [0, K);
// a network of N users and M cells uses [0, N) and [0, M).
using ContentId = std::uint32_t;
using UserId = std::uint32_t;
using CellId = std::uint32_t;

}  // namespace softcache
