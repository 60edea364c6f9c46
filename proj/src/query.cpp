#include "rangelsh/query.hpp"

#include <algorithm>

#include "rangelsh/error.hpp"

namespace rangelsh {

namespace {

// Heap comparator: the element that ranks last sits at the front.
bool heap_less(const Neighbor& a, const Neighbor& b) { return ranks_before(a, b); }

void check_query_args(const MipsIndex& index, std::span<const double> q, std::size_t k) {
    if (k == 0) fail("k must be at least 1");
    if (q.size() != index.data().dim()) {
        fail("dimension mismatch: index holds " + std::to_string(index.data().dim()) + "-d items, query has " +
             std::to_string(q.size()));
    }
}

}  // namespace

TopK::TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

void TopK::push(std::uint32_t id, double score) {
    const Neighbor cand{id, score};
    if (heap_.size() < k_) {
        heap_.push_back(cand);
        std::push_heap(heap_.begin(), heap_.end(), heap_less);
    } else if (ranks_before(cand, heap_.front())) {
        std::pop_heap(heap_.begin(), heap_.end(), heap_less);
        heap_.back() = cand;
        std::push_heap(heap_.begin(), heap_.end(), heap_less);
    }
}

std::vector<Neighbor> TopK::sorted() const {
    std::vector<Neighbor> out = heap_;
    std::sort(out.begin(), out.end(), ranks_before);
    return out;
}

QueryResult MipsIndex::query(std::span<const double> q, std::uint64_t budget, std::size_t k,
                             bool keep_trace) const {
    check_query_args(*this, q, k);
    if (budget == 0) fail("probe budget must be at least 1");
    const DatasetView& items = data();
    TopK top(k);
    QueryResult result;
    probe(q, [&](const ProbeRecord& where, std::span<const std::uint32_t> ids) {
        for (std::uint32_t id : ids) top.push(id, dot(items[id], q));
        result.probed_items += ids.size();
        ++result.buckets_visited;
        if (keep_trace) {
            ProbeRecord rec = where;
            rec.probed_so_far = result.probed_items;
            result.trace.push_back(rec);
        }
        return result.probed_items < budget;
    });
    result.top = top.sorted();
    result.shortfall = result.probed_items < k;
    return result;
}

std::vector<BudgetPoint> query_budgets(const MipsIndex& index, std::span<const double> q,
                                       std::span<const std::uint64_t> budgets, std::size_t k) {
    check_query_args(index, q, k);
    if (!std::is_sorted(budgets.begin(), budgets.end()) || (!budgets.empty() && budgets.front() == 0)) {
        fail("budgets must be positive and ascending");
    }
    const DatasetView& items = index.data();
    TopK top(k);
    std::uint64_t probed = 0;
    std::size_t next = 0;
    std::vector<BudgetPoint> points;
    points.reserve(budgets.size());
    if (budgets.empty()) return points;
    index.probe(q, [&](const ProbeRecord&, std::span<const std::uint32_t> ids) {
        for (std::uint32_t id : ids) top.push(id, dot(items[id], q));
        probed += ids.size();
        if (probed >= budgets[next]) {
            auto snapshot = top.sorted();
            while (next < budgets.size() && probed >= budgets[next]) {
                points.push_back({budgets[next], probed, snapshot});
                ++next;
            }
        }
        return next < budgets.size();
    });
    // Budgets beyond the index size see everything.
    if (next < budgets.size()) {
        auto snapshot = top.sorted();
        for (; next < budgets.size(); ++next) points.push_back({budgets[next], probed, snapshot});
    }
    return points;
}

}  // namespace rangelsh
