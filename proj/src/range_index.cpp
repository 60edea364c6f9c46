#include "rangelsh/range_index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "binary_io.hpp"
#include "partition_util.hpp"
#include "rangelsh/error.hpp"
#include "rangelsh/transforms.hpp"

namespace rangelsh {

namespace {

constexpr std::string_view kMagic = "MIPSRANG";
constexpr std::uint32_t kVersion = 1;

void fill_normalizers(const DatasetView& ds, PartitionSpec& spec) {
    spec.normalizer.assign(spec.count, 0.0);
    for (std::uint32_t j = 0; j < spec.count; ++j) {
        if (spec.members[j].empty()) {
            spec.normalizer[j] = spec.upper[j];
            continue;
        }
        double u = 0.0;
        for (std::uint32_t id : spec.members[j]) u = std::max(u, ds.norm(id));
        spec.normalizer[j] = u;
    }
}

}  // namespace

void finish_membership(PartitionSpec& spec, std::size_t n) {
    spec.assignment.assign(n, 0);
    std::vector<bool> seen(n, false);
    for (std::uint32_t j = 0; j < spec.members.size(); ++j) {
        std::sort(spec.members[j].begin(), spec.members[j].end());
        for (std::uint32_t id : spec.members[j]) {
            if (seen[id]) fail("item " + std::to_string(id) + " appears in more than one partition");
            seen[id] = true;
            spec.assignment[id] = j;
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) fail("snapshot does not cover every item");
}

PartitionScheme parse_scheme(std::string_view name) {
    if (name == "percentile") return PartitionScheme::Percentile;
    if (name == "uniform") return PartitionScheme::Uniform;
    fail("unknown partition scheme '" + std::string(name) + "' (expected percentile or uniform)");
}

std::string_view scheme_name(PartitionScheme scheme) {
    return scheme == PartitionScheme::Percentile ? "percentile" : "uniform";
}

PartitionSpec partition(const DatasetView& ds, std::uint32_t count, PartitionScheme scheme) {
    if (ds.empty()) fail("cannot partition an empty dataset");
    if (count == 0) fail("partition count must be at least 1");
    const std::size_t n = ds.size();
    PartitionSpec spec;
    spec.scheme = scheme;
    spec.count = count;
    spec.assignment.assign(n, 0);
    spec.members.assign(count, {});
    spec.lower.assign(count, 0.0);
    spec.upper.assign(count, 0.0);
    spec.max_norm = ds.max_norm();

    if (scheme == PartitionScheme::Percentile) {
        if (count > n) {
            fail("percentile partitioning needs m <= n (m=" + std::to_string(count) + ", n=" + std::to_string(n) +
                 ")");
        }
        std::vector<std::uint32_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return ds.norm(a) < ds.norm(b); });
        for (std::uint32_t j = 0; j < count; ++j) {
            const std::size_t begin = j * n / count;
            const std::size_t end = (static_cast<std::size_t>(j) + 1) * n / count;
            auto& members = spec.members[j];
            members.assign(order.begin() + begin, order.begin() + end);
            std::sort(members.begin(), members.end());
            for (std::uint32_t id : members) spec.assignment[id] = j;
            spec.upper[j] = ds.norm(order[end - 1]);
            spec.lower[j] = j == 0 ? 0.0 : spec.upper[j - 1];
        }
    } else {
        const auto [lo_it, hi_it] = std::minmax_element(ds.norms().begin(), ds.norms().end());
        const double lo = *lo_it;
        const double hi = *hi_it;
        const double width = (hi - lo) / count;
        for (std::uint32_t j = 0; j < count; ++j) {
            spec.lower[j] = lo + j * width;
            spec.upper[j] = j + 1 == count ? hi : lo + (j + 1) * width;
        }
        for (std::uint32_t id = 0; id < n; ++id) {
            std::uint32_t j = 0;
            if (width > 0.0) {
                // Intervals are (lower, upper]; the minimum joins partition 0.
                const double pos = std::ceil((ds.norm(id) - lo) / width) - 1.0;
                j = static_cast<std::uint32_t>(std::clamp(pos, 0.0, static_cast<double>(count - 1)));
                // Guard the rounding of the division against the stored bounds.
                while (j > 0 && ds.norm(id) <= spec.lower[j]) --j;
                while (j + 1 < count && ds.norm(id) > spec.upper[j]) ++j;
            }
            spec.assignment[id] = j;
            spec.members[j].push_back(id);
        }
    }
    fill_normalizers(ds, spec);
    return spec;
}

std::size_t sub_index_count_with_max_norm(const PartitionSpec& spec) {
    return static_cast<std::size_t>(
        std::count(spec.normalizer.begin(), spec.normalizer.end(), spec.max_norm));
}

double score_bucket(double normalizer, unsigned matches, unsigned hash_bits, double epsilon) {
    if (hash_bits == 0) fail("hash bit count must be positive");
    if (matches > hash_bits) {
        fail("match count " + std::to_string(matches) + " exceeds hash bits " + std::to_string(hash_bits));
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) fail("epsilon must lie in [0, 1)");
    if (normalizer < 0.0) fail("normalizer must be nonnegative");
    const double mismatch = 1.0 - static_cast<double>(matches) / hash_bits;
    return normalizer * std::cos(std::numbers::pi * (1.0 - epsilon) * mismatch);
}

std::vector<ScheduleEntry> build_probe_schedule(std::span<const double> normalizers, unsigned hash_bits,
                                                double epsilon) {
    std::vector<ScheduleEntry> entries;
    entries.reserve(normalizers.size() * (hash_bits + 1));
    for (std::uint32_t j = 0; j < normalizers.size(); ++j) {
        for (unsigned l = 0; l <= hash_bits; ++l) {
            entries.push_back({j, l, score_bucket(normalizers[j], l, hash_bits, epsilon)});
        }
    }
    std::sort(entries.begin(), entries.end(), [&](const ScheduleEntry& a, const ScheduleEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        const double ua = normalizers[a.partition];
        const double ub = normalizers[b.partition];
        if (ua != ub) return ua > ub;
        if (a.matches != b.matches) return a.matches > b.matches;
        return a.partition < b.partition;
    });
    return entries;
}

unsigned index_bits_for(std::uint32_t partitions) {
    if (partitions == 0) fail("partition count must be at least 1");
    return partitions == 1 ? 0u : static_cast<unsigned>(std::bit_width(partitions - 1));
}

RangeIndex RangeIndex::build(std::shared_ptr<const DatasetView> data, unsigned total_bits,
                             std::uint32_t partitions, PartitionScheme scheme, double epsilon,
                             std::uint64_t seed) {
    if (!data || data->empty()) fail("cannot index an empty dataset");
    if (data->max_norm() <= 0.0) fail("cannot index a dataset whose items all have zero norm");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) fail("epsilon must lie in [0, 1)");
    if (total_bits > 64) fail("total code length must be at most 64, got " + std::to_string(total_bits));
    const unsigned index_bits = index_bits_for(partitions);
    if (total_bits <= index_bits) {
        fail("code length " + std::to_string(total_bits) + " leaves no hash bits after " +
             std::to_string(index_bits) + " partition-index bits");
    }

    RangeIndex idx;
    idx.spec_ = partition(*data, partitions, scheme);
    idx.total_bits_ = total_bits;
    idx.index_bits_ = index_bits;
    idx.epsilon_ = epsilon;
    idx.seed_ = seed;
    idx.subs_.reserve(partitions);
    for (std::uint32_t j = 0; j < partitions; ++j) {
        idx.subs_.push_back(SimpleIndex::build_subset(data, idx.spec_.members[j], idx.spec_.normalizer[j],
                                                      idx.hash_bits(), derive_seed(seed, j)));
    }
    idx.schedule_ = build_probe_schedule(idx.spec_.normalizer, idx.hash_bits(), epsilon);
    idx.data_ = std::move(data);
    return idx;
}

void RangeIndex::probe(std::span<const double> q, const BucketVisitor& visit) const {
    if (q.size() != data_->dim()) {
        fail("dimension mismatch: index holds " + std::to_string(data_->dim()) + "-d items, query has " +
             std::to_string(q.size()));
    }
    std::vector<std::vector<std::vector<std::uint32_t>>> groups(subs_.size());
    for (std::uint32_t j = 0; j < subs_.size(); ++j) {
        if (subs_[j].buckets().empty()) continue;
        groups[j] = subs_[j].group_by_matches(subs_[j].query_code(q));
    }
    for (const ScheduleEntry& e : schedule_) {
        if (groups[e.partition].empty()) continue;
        const auto& buckets = subs_[e.partition].buckets();
        for (std::uint32_t b : groups[e.partition][e.matches]) {
            if (!visit({e.partition, e.matches, buckets[b].code, 0}, buckets[b].ids)) return;
        }
    }
}

BinaryCode RangeIndex::composite_code(std::uint32_t partition, std::uint64_t hash_code) const {
    const unsigned hb = hash_bits();
    const std::uint64_t high = hb >= 64 ? 0 : static_cast<std::uint64_t>(partition) << hb;
    return {high | (hash_code & low_mask(hb)), total_bits_};
}

void RangeIndex::save(std::ostream& out) const {
    write_magic(out, kMagic);
    write_le(out, kVersion);
    write_le(out, static_cast<std::uint32_t>(total_bits_));
    write_le(out, static_cast<std::uint32_t>(index_bits_));
    write_le(out, spec_.count);
    write_le(out, static_cast<std::uint8_t>(spec_.scheme));
    write_le(out, epsilon_);
    write_le(out, seed_);
    for (std::uint32_t j = 0; j < spec_.count; ++j) {
        write_le(out, spec_.lower[j]);
        write_le(out, spec_.upper[j]);
        write_le(out, spec_.normalizer[j]);
    }
    for (const SimpleIndex& sub : subs_) sub.save(out);
    if (!out) fail_io("snapshot write failed");
}

RangeIndex RangeIndex::load(std::istream& in, std::shared_ptr<const DatasetView> data) {
    if (!data) fail("snapshot loading needs the indexed dataset");
    expect_magic(in, kMagic);
    const auto version = read_le<std::uint32_t>(in, "range snapshot header");
    if (version != kVersion) fail("unsupported range snapshot version " + std::to_string(version));
    RangeIndex idx;
    idx.total_bits_ = read_le<std::uint32_t>(in, "range snapshot header");
    idx.index_bits_ = read_le<std::uint32_t>(in, "range snapshot header");
    const auto count = read_le<std::uint32_t>(in, "range snapshot header");
    const auto scheme = read_le<std::uint8_t>(in, "range snapshot header");
    idx.epsilon_ = read_le<double>(in, "range snapshot header");
    idx.seed_ = read_le<std::uint64_t>(in, "range snapshot header");
    if (count == 0 || scheme > 1) fail("corrupt range snapshot header");
    if (idx.index_bits_ != index_bits_for(count) || idx.total_bits_ <= idx.index_bits_ || idx.total_bits_ > 64) {
        fail("range snapshot bit layout is inconsistent");
    }

    PartitionSpec& spec = idx.spec_;
    spec.scheme = static_cast<PartitionScheme>(scheme);
    spec.count = count;
    spec.max_norm = data->max_norm();
    spec.lower.resize(count);
    spec.upper.resize(count);
    spec.normalizer.resize(count);
    for (std::uint32_t j = 0; j < count; ++j) {
        spec.lower[j] = read_le<double>(in, "partition bounds");
        spec.upper[j] = read_le<double>(in, "partition bounds");
        spec.normalizer[j] = read_le<double>(in, "partition bounds");
    }
    spec.members.assign(count, {});
    for (std::uint32_t j = 0; j < count; ++j) {
        idx.subs_.push_back(SimpleIndex::load(in, data));
        if (idx.subs_.back().bits() != idx.hash_bits()) fail("sub-index code length mismatch");
        for (const Bucket& b : idx.subs_.back().buckets()) {
            spec.members[j].insert(spec.members[j].end(), b.ids.begin(), b.ids.end());
        }
    }
    finish_membership(spec, data->size());
    idx.schedule_ = build_probe_schedule(spec.normalizer, idx.hash_bits(), idx.epsilon_);
    idx.data_ = std::move(data);
    return idx;
}

BucketStats bucket_stats(const RangeIndex& idx) {
    BucketStats stats;
    for (const SimpleIndex& sub : idx.sub_indexes()) merge_stats(stats, bucket_stats(sub));
    return stats;
}

RangeIndex build_range_index(std::shared_ptr<const DatasetView> data, unsigned total_bits,
                             std::uint32_t partitions, PartitionScheme scheme, double epsilon,
                             std::uint64_t seed) {
    return RangeIndex::build(std::move(data), total_bits, partitions, scheme, epsilon, seed);
}

QueryResult query_range(const RangeIndex& idx, std::span<const double> q, std::uint64_t budget, std::size_t k) {
    return idx.query(q, budget, k);
}

}  // namespace rangelsh
