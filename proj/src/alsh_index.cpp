#include "rangelsh/alsh_index.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "binary_io.hpp"
#include "partition_util.hpp"
#include "rangelsh/error.hpp"

namespace rangelsh {

namespace {

constexpr std::string_view kMagic = "MIPSALSH";
constexpr std::string_view kRangedMagic = "MIPSRALS";
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kIdentitySpotChecks = 100;

void validate(const AlshTransformConfig& cfg) {
    if (cfg.m == 0) fail("ALSH augmentation count m must be at least 1");
    if (!(cfg.scale > 0.0)) fail("ALSH scale U must be positive");
    if (!(cfg.width > 0.0)) fail("ALSH bucket width r must be positive");
}

// |P(x) - Q(q)|^2 = 1 + m/4 - 2U x.q + |Ux|^(2^(m+1)) for unit q.
void check_distance_identity(const AlshTransformConfig& cfg, std::span<const double> x,
                             std::span<const double> item_image, std::span<const double> query_image,
                             std::span<const double> q, std::uint32_t id) {
    double direct = 0.0;
    for (std::size_t i = 0; i < item_image.size(); ++i) {
        const double diff = item_image[i] - query_image[i];
        direct += diff * diff;
    }
    double scaled_sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) scaled_sq += (cfg.scale * x[i]) * (cfg.scale * x[i]);
    double tail = scaled_sq;  // |Ux|^2 raised to 2^m gives |Ux|^(2^(m+1))
    for (unsigned i = 0; i < cfg.m; ++i) tail *= tail;
    const double closed = 1.0 + cfg.m / 4.0 - 2.0 * cfg.scale * dot(x, q) + tail;
    if (std::abs(direct - closed) > 1e-9) {
        fail_invariant("ALSH distance identity violated for item " + std::to_string(id));
    }
}

std::vector<std::int64_t> hash_all(const std::vector<L2HashFunction>& fns, std::span<const double> v) {
    std::vector<std::int64_t> code(fns.size());
    for (std::size_t i = 0; i < fns.size(); ++i) code[i] = l2_hash(fns[i], v);
    return code;
}

}  // namespace

double alsh_scale_for(double headroom, double max_norm) {
    if (!(headroom > 0.0 && headroom < 1.0)) fail("ALSH headroom must lie in (0, 1)");
    return max_norm > 0.0 ? headroom / max_norm : headroom;
}

AlshIndex AlshIndex::build(std::shared_ptr<const DatasetView> data, const AlshTransformConfig& cfg,
                           unsigned hashes, std::uint64_t seed) {
    if (!data || data->empty()) fail("cannot index an empty dataset");
    std::vector<std::uint32_t> ids(data->size());
    std::iota(ids.begin(), ids.end(), 0u);
    return build_subset(std::move(data), ids, cfg, hashes, seed);
}

AlshIndex AlshIndex::build_subset(std::shared_ptr<const DatasetView> data, std::span<const std::uint32_t> ids,
                                  const AlshTransformConfig& cfg, unsigned hashes, std::uint64_t seed) {
    if (!data || data->empty()) fail("cannot index an empty dataset");
    validate(cfg);
    if (hashes == 0) fail("ALSH needs at least one hash function");
    double max_norm = 0.0;
    for (std::uint32_t id : ids) max_norm = std::max(max_norm, data->norm(id));
    if (cfg.scale * max_norm >= 1.0) {
        fail("ALSH scaling violation: U * maxNorm = " + std::to_string(cfg.scale * max_norm) + " is not below 1");
    }

    AlshIndex idx;
    idx.cfg_ = cfg;
    idx.seed_ = seed;
    idx.item_count_ = ids.size();
    Rng rng(seed);
    const std::size_t dim = data->dim() + cfg.m;
    for (unsigned i = 0; i < hashes; ++i) idx.fns_.push_back(L2HashFunction::sample(dim, cfg.width, rng));

    Vector probe(data->dim(), 1.0 / std::sqrt(static_cast<double>(data->dim())));
    const Vector probe_image = alsh_transform_query(cfg, probe);

    std::map<std::vector<std::int64_t>, std::vector<std::uint32_t>> table;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::uint32_t id = ids[i];
        const Vector image = alsh_transform_item(cfg, (*data)[id]);
        if (i < kIdentitySpotChecks) check_distance_identity(cfg, (*data)[id], image, probe_image, probe, id);
        table[hash_all(idx.fns_, image)].push_back(id);
    }
    idx.buckets_.reserve(table.size());
    for (auto& [code, members] : table) idx.buckets_.push_back({code, std::move(members)});
    idx.data_ = std::move(data);
    return idx;
}

std::vector<std::int64_t> AlshIndex::query_code(std::span<const double> q) const {
    if (q.size() != data_->dim()) {
        fail("dimension mismatch: index holds " + std::to_string(data_->dim()) + "-d items, query has " +
             std::to_string(q.size()));
    }
    return hash_all(fns_, alsh_transform_query(cfg_, q));
}

std::vector<std::vector<std::uint32_t>> AlshIndex::group_by_matches(std::span<const std::int64_t> code) const {
    std::vector<std::vector<std::uint32_t>> groups(fns_.size() + 1);
    for (std::uint32_t b = 0; b < buckets_.size(); ++b) {
        const auto& bc = buckets_[b].code;
        unsigned matches = 0;
        for (std::size_t i = 0; i < bc.size(); ++i) matches += bc[i] == code[i];
        groups[matches].push_back(b);
    }
    return groups;
}

void AlshIndex::probe(std::span<const double> q, const BucketVisitor& visit) const {
    if (buckets_.empty()) fail("cannot query an empty ALSH index");
    const auto groups = group_by_matches(query_code(q));
    for (unsigned l = hashes() + 1; l-- > 0;) {
        for (std::uint32_t b : groups[l]) {
            if (!visit({0, l, b, 0}, buckets_[b].ids)) return;
        }
    }
}

void AlshIndex::save(std::ostream& out) const {
    write_magic(out, kMagic);
    write_le(out, kVersion);
    write_le(out, static_cast<std::uint32_t>(fns_.size()));
    write_le(out, static_cast<std::uint32_t>(data_->dim()));
    write_le(out, static_cast<std::uint64_t>(item_count_));
    write_le(out, seed_);
    write_le(out, static_cast<std::uint32_t>(cfg_.m));
    write_le(out, cfg_.scale);
    write_le(out, cfg_.width);
    for (const L2HashFunction& h : fns_) {
        for (double v : h.direction) write_le(out, v);
        write_le(out, h.offset);
    }
    write_le(out, static_cast<std::uint64_t>(buckets_.size()));
    for (const AlshBucket& b : buckets_) {
        for (std::int64_t c : b.code) write_le(out, c);
        write_le(out, static_cast<std::uint64_t>(b.ids.size()));
        for (std::uint32_t id : b.ids) write_le(out, id);
    }
    if (!out) fail_io("snapshot write failed");
}

AlshIndex AlshIndex::load(std::istream& in, std::shared_ptr<const DatasetView> data) {
    if (!data) fail("snapshot loading needs the indexed dataset");
    expect_magic(in, kMagic);
    const auto version = read_le<std::uint32_t>(in, "ALSH snapshot header");
    if (version != kVersion) fail("unsupported ALSH snapshot version " + std::to_string(version));
    const auto hashes = read_le<std::uint32_t>(in, "ALSH snapshot header");
    const auto dim = read_le<std::uint32_t>(in, "ALSH snapshot header");
    const auto n = read_le<std::uint64_t>(in, "ALSH snapshot header");
    AlshIndex idx;
    idx.seed_ = read_le<std::uint64_t>(in, "ALSH snapshot header");
    idx.cfg_.m = read_le<std::uint32_t>(in, "ALSH snapshot header");
    idx.cfg_.scale = read_le<double>(in, "ALSH snapshot header");
    idx.cfg_.width = read_le<double>(in, "ALSH snapshot header");
    validate(idx.cfg_);
    if (dim != data->dim()) fail("snapshot dimension does not match dataset dimension");
    if (hashes == 0) fail("ALSH snapshot has no hash functions");
    idx.item_count_ = n;
    for (std::uint32_t i = 0; i < hashes; ++i) {
        L2HashFunction h;
        h.direction.resize(dim + idx.cfg_.m);
        for (double& v : h.direction) v = read_le<double>(in, "hash function");
        h.offset = read_le<double>(in, "hash function");
        h.width = idx.cfg_.width;
        idx.fns_.push_back(std::move(h));
    }
    const auto bucket_count = read_le<std::uint64_t>(in, "bucket table");
    if (bucket_count > n) fail("snapshot lists more buckets than items");
    idx.buckets_.resize(bucket_count);
    std::uint64_t seen = 0;
    for (AlshBucket& b : idx.buckets_) {
        b.code.resize(hashes);
        for (std::int64_t& c : b.code) c = read_le<std::int64_t>(in, "bucket record");
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

RangedAlshIndex RangedAlshIndex::build(std::shared_ptr<const DatasetView> data, std::uint32_t partitions,
                                       PartitionScheme scheme, const AlshTransformConfig& cfg, unsigned hashes,
                                       std::uint64_t seed) {
    if (!data || data->empty()) fail("cannot index an empty dataset");
    RangedAlshIndex idx;
    idx.headroom_ = cfg.scale;
    idx.seed_ = seed;
    idx.spec_ = partition(*data, partitions, scheme);
    for (std::uint32_t j = 0; j < partitions; ++j) {
        AlshTransformConfig local = cfg;
        local.scale = alsh_scale_for(cfg.scale, idx.spec_.upper[j]);
        idx.subs_.push_back(
            AlshIndex::build_subset(data, idx.spec_.members[j], local, hashes, derive_seed(seed, j)));
    }
    idx.data_ = std::move(data);
    return idx;
}

void RangedAlshIndex::probe(std::span<const double> q, const BucketVisitor& visit) const {
    if (q.size() != data_->dim()) {
        fail("dimension mismatch: index holds " + std::to_string(data_->dim()) + "-d items, query has " +
             std::to_string(q.size()));
    }
    std::vector<std::vector<std::vector<std::uint32_t>>> groups(subs_.size());
    unsigned hashes = 0;
    for (std::uint32_t j = 0; j < subs_.size(); ++j) {
        hashes = subs_[j].hashes();
        if (subs_[j].buckets().empty()) continue;
        groups[j] = subs_[j].group_by_matches(subs_[j].query_code(q));
    }
    for (unsigned l = hashes + 1; l-- > 0;) {
        for (std::uint32_t j = 0; j < subs_.size(); ++j) {
            if (groups[j].empty()) continue;
            for (std::uint32_t b : groups[j][l]) {
                if (!visit({j, l, b, 0}, subs_[j].buckets()[b].ids)) return;
            }
        }
    }
}

void RangedAlshIndex::save(std::ostream& out) const {
    write_magic(out, kRangedMagic);
    write_le(out, kVersion);
    write_le(out, spec_.count);
    write_le(out, static_cast<std::uint8_t>(spec_.scheme));
    write_le(out, headroom_);
    write_le(out, seed_);
    for (std::uint32_t j = 0; j < spec_.count; ++j) {
        write_le(out, spec_.lower[j]);
        write_le(out, spec_.upper[j]);
        write_le(out, spec_.normalizer[j]);
    }
    for (const AlshIndex& sub : subs_) sub.save(out);
    if (!out) fail_io("snapshot write failed");
}

RangedAlshIndex RangedAlshIndex::load(std::istream& in, std::shared_ptr<const DatasetView> data) {
    if (!data) fail("snapshot loading needs the indexed dataset");
    expect_magic(in, kRangedMagic);
    const auto version = read_le<std::uint32_t>(in, "ranged ALSH snapshot header");
    if (version != kVersion) fail("unsupported ranged ALSH snapshot version " + std::to_string(version));
    RangedAlshIndex idx;
    PartitionSpec& spec = idx.spec_;
    spec.count = read_le<std::uint32_t>(in, "ranged ALSH snapshot header");
    const auto scheme = read_le<std::uint8_t>(in, "ranged ALSH snapshot header");
    idx.headroom_ = read_le<double>(in, "ranged ALSH snapshot header");
    idx.seed_ = read_le<std::uint64_t>(in, "ranged ALSH snapshot header");
    if (spec.count == 0 || scheme > 1) fail("corrupt ranged ALSH snapshot header");
    spec.scheme = static_cast<PartitionScheme>(scheme);
    spec.max_norm = data->max_norm();
    spec.lower.resize(spec.count);
    spec.upper.resize(spec.count);
    spec.normalizer.resize(spec.count);
    for (std::uint32_t j = 0; j < spec.count; ++j) {
        spec.lower[j] = read_le<double>(in, "partition bounds");
        spec.upper[j] = read_le<double>(in, "partition bounds");
        spec.normalizer[j] = read_le<double>(in, "partition bounds");
    }
    spec.members.assign(spec.count, {});
    for (std::uint32_t j = 0; j < spec.count; ++j) {
        idx.subs_.push_back(AlshIndex::load(in, data));
        for (const AlshBucket& b : idx.subs_.back().buckets()) {
            spec.members[j].insert(spec.members[j].end(), b.ids.begin(), b.ids.end());
        }
    }
    finish_membership(spec, data->size());
    idx.data_ = std::move(data);
    return idx;
}

namespace {

BucketStats alsh_stats(const AlshIndex& idx) {
    BucketStats stats;
    for (const AlshBucket& b : idx.buckets()) {
        stats.item_count += b.ids.size();
        ++stats.non_empty_buckets;
        stats.largest_bucket = std::max(stats.largest_bucket, b.ids.size());
        ++stats.size_histogram[b.ids.size()];
    }
    return stats;
}

}  // namespace

BucketStats bucket_stats(const AlshIndex& idx) { return alsh_stats(idx); }

BucketStats bucket_stats(const RangedAlshIndex& idx) {
    BucketStats stats;
    for (const AlshIndex& sub : idx.sub_indexes()) merge_stats(stats, alsh_stats(sub));
    return stats;
}

AlshIndex build_alsh_index(std::shared_ptr<const DatasetView> data, const AlshTransformConfig& cfg,
                           unsigned hashes, std::uint64_t seed) {
    return AlshIndex::build(std::move(data), cfg, hashes, seed);
}

QueryResult query_alsh(const MipsIndex& idx, std::span<const double> q, std::uint64_t budget, std::size_t k) {
    return idx.query(q, budget, k);
}

RangedAlshIndex build_ranged_alsh(std::shared_ptr<const DatasetView> data, std::uint32_t partitions,
                                  PartitionScheme scheme, const AlshTransformConfig& cfg, unsigned hashes,
                                  std::uint64_t seed) {
    return RangedAlshIndex::build(std::move(data), partitions, scheme, cfg, hashes, seed);
}

}  // namespace rangelsh
