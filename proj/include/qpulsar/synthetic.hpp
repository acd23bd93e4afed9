// Synthetic stand-in for HTRU-2: class-conditional draws with roughly the per-class
// feature means and spreads of the real candidates. For smoke runs and timing only.

#pragma once

#include "qpulsar/data.hpp"

#include <cstddef>
#include <cstdint>

namespace qpulsar {

/// Raw (unnormalized) samples, negatives first then positives, in the 9-column shape.
Dataset synthesize_htru2_like(std::size_t negatives, std::size_t positives, std::uint64_t seed);

}  // namespace qpulsar
