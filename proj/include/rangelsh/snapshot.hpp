#pragma once

#include <filesystem>
#include <memory>

#include "rangelsh/dataset.hpp"
#include "rangelsh/query.hpp"

namespace rangelsh {

/// Writes any of the four index types in its own snapshot format.
void save_index(const MipsIndex& index, const std::filesystem::path& path);

/// Reads a snapshot, dispatching on its 8-byte magic. The indexed dataset is
/// not part of the snapshot and must be supplied.
std::unique_ptr<MipsIndex> load_index(const std::filesystem::path& path, std::shared_ptr<const DatasetView> data);

}  // namespace rangelsh
