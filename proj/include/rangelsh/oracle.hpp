#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "rangelsh/dataset.hpp"
#include "rangelsh/query.hpp"

namespace rangelsh {

/// Exact top-k by inner product, ties by ascending id. k > n yields all n.
std::vector<Neighbor> brute_force_topk(const DatasetView& ds, std::span<const double> q, std::size_t k);

struct GroundTruth {
    std::size_t k = 0;
    std::vector<std::vector<Neighbor>> rows;
    std::uint64_t dataset_fingerprint = 0;
    std::uint64_t query_fingerprint = 0;
};

GroundTruth compute_ground_truth(const DatasetView& ds, const DatasetView& queries, std::size_t k);

/// |retrieved ∩ truth| / |truth|.
double recall_at_k(std::span<const Neighbor> retrieved, std::span<const Neighbor> truth);
double recall_at_k(std::span<const std::uint32_t> retrieved, std::span<const Neighbor> truth);

void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// Cache file name for (dataset, queries, k) inside `dir`.
std::filesystem::path ground_truth_cache_path(const std::filesystem::path& dir, std::uint64_t dataset_fp,
                                              std::uint64_t query_fp, std::size_t k);

/// Loads from the cache when present, otherwise computes and stores.
GroundTruth cached_ground_truth(const DatasetView& ds, const DatasetView& queries, std::size_t k,
                                const std::filesystem::path& cache_dir);

}  // namespace rangelsh
