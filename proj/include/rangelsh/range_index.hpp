#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "rangelsh/dataset.hpp"
#include "rangelsh/query.hpp"
#include "rangelsh/simple_index.hpp"

namespace rangelsh {

enum class PartitionScheme : std::uint8_t { Percentile = 0, Uniform = 1 };

PartitionScheme parse_scheme(std::string_view name);
std::string_view scheme_name(PartitionScheme scheme);

/// Split of a dataset into norm ranges. Partition indexes are 0-based here;
/// partition 0 holds the smallest norms.
struct PartitionSpec {
    PartitionScheme scheme = PartitionScheme::Percentile;
    std::uint32_t count = 0;
    /// item id -> partition
    std::vector<std::uint32_t> assignment;
    /// Per partition: ascending member ids.
    std::vector<std::vector<std::uint32_t>> members;
    /// Per partition: norm interval (lower, upper]. Partition 0 also owns its
    /// lower end.
    std::vector<double> lower;
    std::vector<double> upper;
    /// Per partition: max member norm, or `upper` for an empty partition.
    std::vector<double> normalizer;
    double max_norm = 0.0;
};

/// Percentile: stable rank by (norm, id) and cut into `count` contiguous rank
/// ranges whose sizes differ by at most one. Uniform: equal-width norm
/// intervals over [minNorm, maxNorm]; partitions may be empty.
PartitionSpec partition(const DatasetView& ds, std::uint32_t count, PartitionScheme scheme);

/// Number of partitions whose normalizer equals the global max norm.
std::size_t sub_index_count_with_max_norm(const PartitionSpec& spec);

/// Inner-product estimate U_j * cos[pi (1 - eps) (1 - l / L_h)] for a bucket
/// sharing `matches` of `hash_bits` bits with the query.
double score_bucket(double normalizer, unsigned matches, unsigned hash_bits, double epsilon);

struct ScheduleEntry {
    std::uint32_t partition = 0;
    std::uint32_t matches = 0;
    double score = 0.0;

    friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

/// Every (partition, matches) pair scored and sorted by score descending,
/// ties by larger normalizer, then larger matches, then smaller partition.
std::vector<ScheduleEntry> build_probe_schedule(std::span<const double> normalizers, unsigned hash_bits,
                                                double epsilon);

/// Bits needed to address `partitions` sub-indexes: ceil(log2 m).
unsigned index_bits_for(std::uint32_t partitions);

inline constexpr double kDefaultEpsilon = 0.01;

/// Norm-ranging LSH: one SIMPLE-LSH sub-index per norm range, each with its
/// own normalizer, queried through a precomputed cross-partition schedule.
class RangeIndex final : public MipsIndex {
public:
    /// `total_bits` covers the partition-index bits and the hash bits.
    /// Sub-index j draws its projection from derive_seed(seed, j).
    static RangeIndex build(std::shared_ptr<const DatasetView> data, unsigned total_bits,
                            std::uint32_t partitions, PartitionScheme scheme, double epsilon,
                            std::uint64_t seed);

    const DatasetView& data() const override { return *data_; }
    void probe(std::span<const double> q, const BucketVisitor& visit) const override;

    const PartitionSpec& spec() const noexcept { return spec_; }
    const std::vector<SimpleIndex>& sub_indexes() const noexcept { return subs_; }
    const std::vector<ScheduleEntry>& schedule() const noexcept { return schedule_; }
    unsigned total_bits() const noexcept { return total_bits_; }
    unsigned index_bits() const noexcept { return index_bits_; }
    unsigned hash_bits() const noexcept { return total_bits_ - index_bits_; }
    double epsilon() const noexcept { return epsilon_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Full code of a bucket: partition index in the high bits, hash bits below.
    BinaryCode composite_code(std::uint32_t partition, std::uint64_t hash_code) const;

    void save(std::ostream& out) const;
    static RangeIndex load(std::istream& in, std::shared_ptr<const DatasetView> data);

private:
    std::shared_ptr<const DatasetView> data_;
    PartitionSpec spec_;
    std::vector<SimpleIndex> subs_;
    std::vector<ScheduleEntry> schedule_;
    unsigned total_bits_ = 0;
    unsigned index_bits_ = 0;
    double epsilon_ = kDefaultEpsilon;
    std::uint64_t seed_ = 0;
};

BucketStats bucket_stats(const RangeIndex& idx);

RangeIndex build_range_index(std::shared_ptr<const DatasetView> data, unsigned total_bits,
                             std::uint32_t partitions, PartitionScheme scheme, double epsilon,
                             std::uint64_t seed);
QueryResult query_range(const RangeIndex& idx, std::span<const double> q, std::uint64_t budget,
                        std::size_t k);

}  // namespace rangelsh
