#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "rangelsh/dataset.hpp"
#include "rangelsh/hash_family.hpp"
#include "rangelsh/query.hpp"
#include "rangelsh/range_index.hpp"
#include "rangelsh/simple_index.hpp"
#include "rangelsh/transforms.hpp"

namespace rangelsh {

struct AlshBucket {
    std::vector<std::int64_t> code;  // one value per hash function
    std::vector<std::uint32_t> ids;  // ascending
};

/// L2-ALSH: asymmetric transform followed by L independent floor-of-projection
/// hashes. Buckets are ranked by how many of the L hash values they share with
/// the query.
class AlshIndex final : public MipsIndex {
public:
    static AlshIndex build(std::shared_ptr<const DatasetView> data, const AlshTransformConfig& cfg,
                           unsigned hashes, std::uint64_t seed);
    static AlshIndex build_subset(std::shared_ptr<const DatasetView> data,
                                  std::span<const std::uint32_t> ids, const AlshTransformConfig& cfg,
                                  unsigned hashes, std::uint64_t seed);

    const DatasetView& data() const override { return *data_; }
    void probe(std::span<const double> q, const BucketVisitor& visit) const override;

    std::vector<std::int64_t> query_code(std::span<const double> q) const;
    /// groups[l]: bucket ordinals sharing exactly l hash values with `code`.
    std::vector<std::vector<std::uint32_t>> group_by_matches(std::span<const std::int64_t> code) const;

    const AlshTransformConfig& config() const noexcept { return cfg_; }
    unsigned hashes() const noexcept { return static_cast<unsigned>(fns_.size()); }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t item_count() const noexcept { return item_count_; }
    const std::vector<L2HashFunction>& functions() const noexcept { return fns_; }
    /// Lexicographic code order.
    const std::vector<AlshBucket>& buckets() const noexcept { return buckets_; }

    void save(std::ostream& out) const;
    static AlshIndex load(std::istream& in, std::shared_ptr<const DatasetView> data);

private:
    std::shared_ptr<const DatasetView> data_;
    AlshTransformConfig cfg_;
    std::vector<L2HashFunction> fns_;
    std::uint64_t seed_ = 0;
    std::size_t item_count_ = 0;
    std::vector<AlshBucket> buckets_;
};

/// Per-partition L2-ALSH with scale U_j = headroom / u_j, where u_j is the
/// partition's upper norm bound. Probing visits match counts from L down to 0;
/// within one count, partitions in ascending order, then bucket code order.
class RangedAlshIndex final : public MipsIndex {
public:
    /// `cfg.scale` is read as the headroom ratio (0.83 by default).
    static RangedAlshIndex build(std::shared_ptr<const DatasetView> data, std::uint32_t partitions,
                                 PartitionScheme scheme, const AlshTransformConfig& cfg, unsigned hashes,
                                 std::uint64_t seed);

    const DatasetView& data() const override { return *data_; }
    void probe(std::span<const double> q, const BucketVisitor& visit) const override;

    const PartitionSpec& spec() const noexcept { return spec_; }
    const std::vector<AlshIndex>& sub_indexes() const noexcept { return subs_; }
    double headroom() const noexcept { return headroom_; }
    std::uint64_t seed() const noexcept { return seed_; }
    /// Norm bounds (u_{j-1}, u_j] per partition.
    double lower_bound(std::uint32_t j) const { return spec_.lower[j]; }
    double upper_bound(std::uint32_t j) const { return spec_.upper[j]; }

    void save(std::ostream& out) const;
    static RangedAlshIndex load(std::istream& in, std::shared_ptr<const DatasetView> data);

private:
    std::shared_ptr<const DatasetView> data_;
    PartitionSpec spec_;
    std::vector<AlshIndex> subs_;
    double headroom_ = 0.83;
    std::uint64_t seed_ = 0;
};

BucketStats bucket_stats(const AlshIndex& idx);
BucketStats bucket_stats(const RangedAlshIndex& idx);

/// Scale keeping `headroom` as the ratio U * maxNorm, e.g. 0.83 / maxNorm.
double alsh_scale_for(double headroom, double max_norm);

AlshIndex build_alsh_index(std::shared_ptr<const DatasetView> data, const AlshTransformConfig& cfg,
                           unsigned hashes, std::uint64_t seed);
QueryResult query_alsh(const MipsIndex& idx, std::span<const double> q, std::uint64_t budget, std::size_t k);
RangedAlshIndex build_ranged_alsh(std::shared_ptr<const DatasetView> data, std::uint32_t partitions,
                                  PartitionScheme scheme, const AlshTransformConfig& cfg, unsigned hashes,
                                  std::uint64_t seed);

}  // namespace rangelsh
