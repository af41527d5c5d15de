#pragma once

#include <span>

namespace fmcl {

/// Adjusted Rand Index of two labelings from the pair-counting contingency
/// table. Two identical trivial partitions (all singletons or all together)
/// score 1. Throws std::invalid_argument on a length mismatch.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace fmcl
