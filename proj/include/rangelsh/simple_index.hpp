#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "rangelsh/dataset.hpp"
#include "rangelsh/hash_family.hpp"
#include "rangelsh/query.hpp"

namespace rangelsh {

struct Bucket {
    std::uint64_t code = 0;
    std::vector<std::uint32_t> ids;  // ascending
};

struct BucketStats {
    std::size_t item_count = 0;
    std::size_t non_empty_buckets = 0;
    std::size_t largest_bucket = 0;
    /// size -> number of buckets with that size
    std::map<std::size_t, std::size_t> size_histogram;
};

/// Single-table SIMPLE-LSH index with Hamming-ranking multi-probe.
///
/// Items are mapped with [x/U ; sqrt(1 - |x/U|^2)] and hashed by sign random
/// projection. Queries visit buckets by decreasing number of matching bits,
/// breaking ties by ascending code.
class SimpleIndex final : public MipsIndex {
public:
    /// Indexes every item of `data` with the global maximum norm as normalizer.
    static SimpleIndex build(std::shared_ptr<const DatasetView> data, unsigned bits, std::uint64_t seed);

    /// Indexes only `ids` (ascending) of `data`, normalized by `normalizer`.
    static SimpleIndex build_subset(std::shared_ptr<const DatasetView> data,
                                    std::span<const std::uint32_t> ids, double normalizer,
                                    unsigned bits, std::uint64_t seed);

    const DatasetView& data() const override { return *data_; }
    void probe(std::span<const double> q, const BucketVisitor& visit) const override;

    BinaryCode query_code(std::span<const double> q) const;

    /// Bucket lists in probe order for a query code: groups[l] holds indexes
    /// into buckets() whose codes agree with it in exactly l bits, in code order.
    std::vector<std::vector<std::uint32_t>> group_by_matches(const BinaryCode& query) const;

    unsigned bits() const noexcept { return projection_.bits(); }
    std::uint64_t seed() const noexcept { return projection_.seed(); }
    double normalizer() const noexcept { return normalizer_; }
    std::size_t item_count() const noexcept { return item_count_; }
    const SignProjection& projection() const noexcept { return projection_; }
    /// Sorted by ascending code.
    const std::vector<Bucket>& buckets() const noexcept { return buckets_; }

    void save(std::ostream& out) const;
    static SimpleIndex load(std::istream& in, std::shared_ptr<const DatasetView> data);

private:
    std::shared_ptr<const DatasetView> data_;
    SignProjection projection_;
    double normalizer_ = 0.0;
    std::size_t item_count_ = 0;
    std::vector<Bucket> buckets_;
};

BucketStats bucket_stats(std::span<const Bucket> buckets);
BucketStats bucket_stats(const SimpleIndex& idx);
void merge_stats(BucketStats& into, const BucketStats& other);

/// Wrappers named after the operations they implement.
SimpleIndex build_simple_index(std::shared_ptr<const DatasetView> data, unsigned bits, std::uint64_t seed);
QueryResult query_multiprobe(const SimpleIndex& idx, std::span<const double> q, std::uint64_t budget,
                             std::size_t k);

}  // namespace rangelsh
