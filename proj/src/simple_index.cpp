#include "rangelsh/simple_index.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "binary_io.hpp"
#include "rangelsh/error.hpp"
#include "rangelsh/transforms.hpp"

namespace rangelsh {

namespace {

constexpr std::string_view kMagic = "MIPSSIMP";
constexpr std::uint32_t kVersion = 1;

std::vector<Bucket> bucketize(const SignProjection& proj, const DatasetView& data,
                              std::span<const std::uint32_t> ids, double normalizer) {
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> table;
    table.reserve(ids.size());
    const SimpleTransformConfig cfg{normalizer};
    for (std::uint32_t id : ids) {
        const Vector image = simple_transform_item(cfg, data[id]);
        table[sign_hash(proj, image).bits].push_back(id);
    }
    std::vector<Bucket> buckets;
    buckets.reserve(table.size());
    for (auto& [code, members] : table) buckets.push_back({code, std::move(members)});
    std::sort(buckets.begin(), buckets.end(), [](const Bucket& a, const Bucket& b) { return a.code < b.code; });
    return buckets;
}

}  // namespace

SimpleIndex SimpleIndex::build(std::shared_ptr<const DatasetView> data, unsigned bits, std::uint64_t seed) {
    if (!data || data->empty()) fail("cannot index an empty dataset");
    if (data->max_norm() <= 0.0) fail("cannot index a dataset whose items all have zero norm");
    std::vector<std::uint32_t> ids(data->size());
    std::iota(ids.begin(), ids.end(), 0u);
    const double normalizer = data->max_norm();
    return build_subset(std::move(data), ids, normalizer, bits, seed);
}

SimpleIndex SimpleIndex::build_subset(std::shared_ptr<const DatasetView> data, std::span<const std::uint32_t> ids,
                                      double normalizer, unsigned bits, std::uint64_t seed) {
    if (!data || data->empty()) fail("cannot index an empty dataset");
    if (bits == 0 || bits > 64) fail("code length must be in [1, 64], got " + std::to_string(bits));
    if (!std::is_sorted(ids.begin(), ids.end())) fail_invariant("subset ids must be ascending");
    SimpleIndex idx;
    idx.projection_ = SignProjection(bits, data->dim() + 1, seed);
    idx.normalizer_ = normalizer;
    idx.item_count_ = ids.size();
    idx.buckets_ = bucketize(idx.projection_, *data, ids, normalizer);
    idx.data_ = std::move(data);
    return idx;
}

BinaryCode SimpleIndex::query_code(std::span<const double> q) const {
    if (q.size() != data_->dim()) {
        fail("dimension mismatch: index holds " + std::to_string(data_->dim()) + "-d items, query has " +
             std::to_string(q.size()));
    }
    return sign_hash(projection_, simple_transform_query(q));
}

std::vector<std::vector<std::uint32_t>> SimpleIndex::group_by_matches(const BinaryCode& query) const {
    std::vector<std::vector<std::uint32_t>> groups(bits() + 1);
    for (std::uint32_t b = 0; b < buckets_.size(); ++b) {
        groups[hamming_matches({buckets_[b].code, bits()}, query)].push_back(b);
    }
    return groups;
}

void SimpleIndex::probe(std::span<const double> q, const BucketVisitor& visit) const {
    const BinaryCode code = query_code(q);
    const auto groups = group_by_matches(code);
    for (unsigned l = bits() + 1; l-- > 0;) {
        for (std::uint32_t b : groups[l]) {
            if (!visit({0, l, buckets_[b].code, 0}, buckets_[b].ids)) return;
        }
    }
}

void SimpleIndex::save(std::ostream& out) const {
    write_magic(out, kMagic);
    write_le(out, kVersion);
    write_le(out, static_cast<std::uint32_t>(bits()));
    write_le(out, static_cast<std::uint32_t>(projection_.dim() - 1));
    write_le(out, static_cast<std::uint64_t>(item_count_));
    write_le(out, projection_.seed());
    write_le(out, normalizer_);
    for (double v : projection_.directions()) write_le(out, v);
    write_le(out, static_cast<std::uint64_t>(buckets_.size()));
    for (const Bucket& b : buckets_) {
        write_le(out, b.code);
        write_le(out, static_cast<std::uint64_t>(b.ids.size()));
        for (std::uint32_t id : b.ids) write_le(out, id);
    }
    if (!out) fail_io("snapshot write failed");
}

SimpleIndex SimpleIndex::load(std::istream& in, std::shared_ptr<const DatasetView> data) {
    if (!data) fail("snapshot loading needs the indexed dataset");
    expect_magic(in, kMagic);
    const auto version = read_le<std::uint32_t>(in, "simple snapshot header");
    if (version != kVersion) fail("unsupported simple snapshot version " + std::to_string(version));
    const auto bits = read_le<std::uint32_t>(in, "simple snapshot header");
    const auto dim = read_le<std::uint32_t>(in, "simple snapshot header");
    const auto n = read_le<std::uint64_t>(in, "simple snapshot header");
    const auto seed = read_le<std::uint64_t>(in, "simple snapshot header");
    const auto normalizer = read_le<double>(in, "simple snapshot header");
    if (dim != data->dim()) {
        fail("snapshot dimension " + std::to_string(dim) + " does not match dataset dimension " +
             std::to_string(data->dim()));
    }
    if (bits == 0 || bits > 64) fail("snapshot code length out of range");
    std::vector<double> directions(static_cast<std::size_t>(bits) * (dim + 1));
    for (double& v : directions) v = read_le<double>(in, "projection matrix");

    SimpleIndex idx;
    idx.projection_ = SignProjection(bits, dim + 1, seed, std::move(directions));
    idx.normalizer_ = normalizer;
    idx.item_count_ = n;
    const auto bucket_count = read_le<std::uint64_t>(in, "bucket table");
    if (bucket_count > n) fail("snapshot lists more buckets than items");
    idx.buckets_.resize(bucket_count);
    std::uint64_t seen = 0;
    for (Bucket& b : idx.buckets_) {
        b.code = read_le<std::uint64_t>(in, "bucket record");
        const auto len = read_le<std::uint64_t>(in, "bucket record");
        if (len == 0 || len > n - seen) fail("snapshot bucket length inconsistent with item count");
        b.ids.resize(len);
        for (std::uint32_t& id : b.ids) {
            id = read_le<std::uint32_t>(in, "bucket record");
            if (id >= data->size()) fail("snapshot item id " + std::to_string(id) + " outside the dataset");
        }
        seen += len;
    }
    if (seen != n) fail("snapshot bucket sizes do not sum to the item count");
    idx.data_ = std::move(data);
    return idx;
}

BucketStats bucket_stats(std::span<const Bucket> buckets) {
    BucketStats stats;
    for (const Bucket& b : buckets) {
        stats.item_count += b.ids.size();
        ++stats.non_empty_buckets;
        stats.largest_bucket = std::max(stats.largest_bucket, b.ids.size());
        ++stats.size_histogram[b.ids.size()];
    }
    return stats;
}

BucketStats bucket_stats(const SimpleIndex& idx) { return bucket_stats(idx.buckets()); }

void merge_stats(BucketStats& into, const BucketStats& other) {
    into.item_count += other.item_count;
    into.non_empty_buckets += other.non_empty_buckets;
    into.largest_bucket = std::max(into.largest_bucket, other.largest_bucket);
    for (const auto& [size, count] : other.size_histogram) into.size_histogram[size] += count;
}

SimpleIndex build_simple_index(std::shared_ptr<const DatasetView> data, unsigned bits, std::uint64_t seed) {
    return SimpleIndex::build(std::move(data), bits, seed);
}

QueryResult query_multiprobe(const SimpleIndex& idx, std::span<const double> q, std::uint64_t budget,
                             std::size_t k) {
    return idx.query(q, budget, k);
}

}  // namespace rangelsh
