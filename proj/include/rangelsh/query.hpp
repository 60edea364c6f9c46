#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rangelsh/dataset.hpp"

namespace rangelsh {

struct Neighbor {
    std::uint32_t id = 0;
    double score = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Larger inner product first, ascending id on ties.
inline bool ranks_before(const Neighbor& a, const Neighbor& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
}

/// One visited bucket. `bucket` is the binary code for sign-projection indexes
/// and the bucket ordinal (position in code order) for L2-ALSH indexes.
struct ProbeRecord {
    std::uint32_t partition = 0;
    std::uint32_t matches = 0;
    std::uint64_t bucket = 0;
    std::uint64_t probed_so_far = 0;

    friend bool operator==(const ProbeRecord&, const ProbeRecord&) = default;
};

struct QueryResult {
    std::vector<Neighbor> top;
    std::uint64_t probed_items = 0;
    std::uint64_t buckets_visited = 0;
    /// Fewer than k items were probed.
    bool shortfall = false;
    std::vector<ProbeRecord> trace;
};

/// Receives buckets in probe order. Returning false stops the walk.
using BucketVisitor = std::function<bool(const ProbeRecord& where, std::span<const std::uint32_t> ids)>;

/// Bounded top-k collector with the deterministic (score desc, id asc) order.
class TopK {
public:
    explicit TopK(std::size_t k);

    void push(std::uint32_t id, double score);
    std::size_t size() const noexcept { return heap_.size(); }
    /// Sorted best-first.
    std::vector<Neighbor> sorted() const;

private:
    std::size_t k_;
    std::vector<Neighbor> heap_;  // worst element at front
};

/// Common surface of the bucketed inner-product indexes.
class MipsIndex {
public:
    virtual ~MipsIndex() = default;

    virtual const DatasetView& data() const = 0;

    /// Walks non-empty buckets in the index's probe order for unit query `q`.
    virtual void probe(std::span<const double> q, const BucketVisitor& visit) const = 0;

    /// Probes whole buckets until at least `budget` items were seen, then
    /// re-ranks every probed item by its exact inner product.
    QueryResult query(std::span<const double> q, std::uint64_t budget, std::size_t k,
                      bool keep_trace = true) const;
};

/// Snapshot of a multi-budget walk: the result each budget would have produced.
struct BudgetPoint {
    std::uint64_t budget = 0;
    std::uint64_t probed_items = 0;
    std::vector<Neighbor> top;
};

/// Runs one probe walk and records, for every budget in the ascending
/// `budgets`, the top-k and probe count that query(q, budget, k) returns.
std::vector<BudgetPoint> query_budgets(const MipsIndex& index, std::span<const double> q,
                                       std::span<const std::uint64_t> budgets, std::size_t k);

}  // namespace rangelsh
