#pragma once

#include <cstddef>

#include "rangelsh/range_index.hpp"

namespace rangelsh {

/// Rebuilds `assignment` from `members` (filled from snapshot buckets), sorts
/// the member lists and checks that every item of an n-item dataset appears
/// exactly once.
void finish_membership(PartitionSpec& spec, std::size_t n);

}  // namespace rangelsh
