#include "rangelsh/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include "binary_io.hpp"
#include "rangelsh/error.hpp"

namespace rangelsh {

namespace {

constexpr std::string_view kMagic = "MIPSGT01";
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::vector<Neighbor> brute_force_topk(const DatasetView& ds, std::span<const double> q, std::size_t k) {
    if (k == 0) fail("k must be at least 1");
    if (ds.empty()) fail("empty dataset");
    if (q.size() != ds.dim()) {
        fail("dimension mismatch: dataset is " + std::to_string(ds.dim()) + "-d, query has " +
             std::to_string(q.size()));
    }
    TopK top(k);
    for (std::uint32_t id = 0; id < ds.size(); ++id) top.push(id, dot(ds[id], q));
    return top.sorted();
}

GroundTruth compute_ground_truth(const DatasetView& ds, const DatasetView& queries, std::size_t k) {
    GroundTruth gt;
    gt.k = std::min(k, ds.size());
    gt.dataset_fingerprint = ds.fingerprint();
    gt.query_fingerprint = queries.fingerprint();
    gt.rows.reserve(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) gt.rows.push_back(brute_force_topk(ds, queries[i], k));
    return gt;
}

double recall_at_k(std::span<const std::uint32_t> retrieved, std::span<const Neighbor> truth) {
    if (truth.empty()) return 1.0;
    std::unordered_set<std::uint32_t> wanted;
    for (const Neighbor& t : truth) wanted.insert(t.id);
    std::size_t hits = 0;
    for (std::uint32_t id : retrieved) hits += wanted.erase(id);
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double recall_at_k(std::span<const Neighbor> retrieved, std::span<const Neighbor> truth) {
    std::vector<std::uint32_t> ids;
    ids.reserve(retrieved.size());
    for (const Neighbor& r : retrieved) ids.push_back(r.id);
    return recall_at_k(std::span<const std::uint32_t>(ids), truth);
}

void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot open " + path.string() + " for writing");
    write_magic(out, kMagic);
    write_le(out, kVersion);
    write_le(out, static_cast<std::uint32_t>(gt.k));
    write_le(out, static_cast<std::uint32_t>(gt.rows.size()));
    for (const auto& row : gt.rows) {
        if (row.size() != gt.k) fail_invariant("ground-truth row has the wrong length");
        for (const Neighbor& nb : row) write_le(out, static_cast<std::int32_t>(nb.id));
        for (const Neighbor& nb : row) write_le(out, nb.score);
    }
    if (!out) fail_io("write failed for " + path.string());
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open " + path.string());
    expect_magic(in, kMagic);
    const auto version = read_le<std::uint32_t>(in, "ground-truth header");
    if (version != kVersion) fail("unsupported ground-truth version " + std::to_string(version));
    GroundTruth gt;
    gt.k = read_le<std::uint32_t>(in, "ground-truth header");
    const auto count = read_le<std::uint32_t>(in, "ground-truth header");
    gt.rows.assign(count, std::vector<Neighbor>(gt.k));
    for (auto& row : gt.rows) {
        for (Neighbor& nb : row) {
            const auto id = read_le<std::int32_t>(in, "ground-truth record");
            if (id < 0) fail("negative id in ground-truth file");
            nb.id = static_cast<std::uint32_t>(id);
        }
        for (Neighbor& nb : row) nb.score = read_le<double>(in, "ground-truth record");
    }
    return gt;
}

std::filesystem::path ground_truth_cache_path(const std::filesystem::path& dir, std::uint64_t dataset_fp,
                                              std::uint64_t query_fp, std::size_t k) {
    char name[96];
    std::snprintf(name, sizeof name, "truth_%016llx_%016llx_k%zu.gt", static_cast<unsigned long long>(dataset_fp),
                  static_cast<unsigned long long>(query_fp), k);
    return dir / name;
}

GroundTruth cached_ground_truth(const DatasetView& ds, const DatasetView& queries, std::size_t k,
                                const std::filesystem::path& cache_dir) {
    const auto dfp = ds.fingerprint();
    const auto qfp = queries.fingerprint();
    const auto path = ground_truth_cache_path(cache_dir, dfp, qfp, k);
    if (std::filesystem::exists(path)) {
        GroundTruth gt = load_ground_truth(path);
        if (gt.rows.size() == queries.size() && gt.k == std::min(k, ds.size())) {
            gt.dataset_fingerprint = dfp;
            gt.query_fingerprint = qfp;
            return gt;
        }
    }
    GroundTruth gt = compute_ground_truth(ds, queries, k);
    std::filesystem::create_directories(cache_dir);
    save_ground_truth(gt, path);
    return gt;
}

}  // namespace rangelsh
