// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "rangelsh/alsh_index.hpp"
#include "rangelsh/bench.hpp"
#include "rangelsh/error.hpp"
#include "rangelsh/oracle.hpp"
#include "rangelsh/random.hpp"
#include "rangelsh/range_index.hpp"
#include "rangelsh/simple_index.hpp"
#include "rangelsh/snapshot.hpp"
#include "rangelsh/theory.hpp"
#include "rangelsh/transforms.hpp"

using namespace rangelsh;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

Vector normal_vector(Rng& rng, std::size_t d) {
    Vector v(d);
    for (double& x : v) x = rng.normal();
    return v;
}

Vector unit_vector(Rng& rng, std::size_t d) {
    Vector v = normal_vector(rng, d);
    const double n = l2_norm(v);
    for (double& x : v) x /= n;
    return v;
}

std::shared_ptr<const DatasetView> lognormal_data(std::size_t n, std::size_t d, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.n = n;
    spec.dim = d;
    spec.param_a = 0.0;
    spec.param_b = 1.0;
    spec.seed = seed;
    return std::make_shared<const DatasetView>(generate_synthetic(spec));
}

// 1. Transform identities.
Verdict transform_identities() {
    Verdict v;
    Rng rng(101);
    double worst_ip = 0.0, worst_norm = 0.0, worst_l2 = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t d = 2 + t % 30;
        const Vector x = normal_vector(rng, d);
        const Vector q = unit_vector(rng, d);
        const double u = l2_norm(x) * rng.uniform(1.0, 4.0);
        const Vector px = simple_transform_item({u}, x);
        worst_ip = std::max(worst_ip, std::abs(dot(px, simple_transform_query(q)) - dot(q, x) / u));
        worst_norm = std::max(worst_norm, std::abs(l2_norm(px) - 1.0));
    }
    for (int t = 0; t < 1000; ++t) {
        const std::size_t d = 2 + t % 30;
        const Vector x = normal_vector(rng, d);
        const Vector q = unit_vector(rng, d);
        const unsigned m = 1 + static_cast<unsigned>(rng.uniform() * 5);
        const double scale = rng.uniform(0.05, 0.99) / l2_norm(x);
        const AlshTransformConfig cfg{m, scale, 2.5};
        const Vector a = alsh_transform_item(cfg, x);
        const Vector b = alsh_transform_query(cfg, q);
        double sq = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
        const double expect =
            1.0 + m / 4.0 - 2.0 * scale * dot(q, x) + std::pow(scale * l2_norm(x), std::pow(2.0, m + 1));
        worst_l2 = std::max(worst_l2, std::abs(sq - expect));
    }
    v.require(worst_ip <= 1e-9, fmt("inner-product error %.3g", worst_ip));
    v.require(worst_norm <= 1e-9, fmt("unit-norm error %.3g", worst_norm));
    v.require(worst_l2 <= 1e-9, fmt("distance identity error %.3g", worst_l2));
    if (v.pass) v.detail = fmt("max errors: ip %.2g, norm %.2g, distance %.2g", worst_ip, worst_norm, worst_l2);
    return v;
}

// 2. Collision-probability calibration.
Verdict collision_calibration() {
    Verdict v;
    Rng rng(202);
    double worst_sign = 0.0;
    const std::size_t d = 10;
    const int tables = 1563;  // 1563 x 64 bits >= 1e5 samples per pair
    for (int pair = 0; pair < 20; ++pair) {
        const Vector x = normal_vector(rng, d);
        const Vector y = normal_vector(rng, d);
        std::uint64_t agree = 0;
        for (int t = 0; t < tables; ++t) {
            const SignProjection proj(64, d, derive_seed(0xC0FFEE00ull + static_cast<std::uint64_t>(pair) * 4096, t));
            agree += hamming_matches(sign_hash(proj, x), sign_hash(proj, y));
        }
        const double rate = static_cast<double>(agree) / (64.0 * tables);
        worst_sign = std::max(worst_sign, std::abs(rate - collision_prob_sign(x, y)));
    }
    const std::pair<double, double> cases[] = {{0.5, 1.0}, {1.0, 2.5}, {2.0, 2.5}, {1.5, 4.0}, {3.0, 1.0}};
    double worst_l2 = 0.0;
    const std::size_t dim = 3;
    for (auto [dist, r] : cases) {
        const Vector a(dim, 0.0);
        Vector b(dim, 0.0);
        b[1] = dist;
        int hits = 0;
        const int trials = 1000000;
        for (int t = 0; t < trials; ++t) {
            const L2HashFunction h = L2HashFunction::sample(dim, r, rng);
            hits += l2_hash(h, a) == l2_hash(h, b);
        }
        worst_l2 = std::max(worst_l2, std::abs(static_cast<double>(hits) / trials - collision_prob_l2(dist, r)));
    }
    v.require(worst_sign <= 0.005, fmt("sign agreement off by %.4f", worst_sign));
    v.require(worst_l2 <= 0.002, fmt("L2 collision off by %.4f", worst_l2));
    if (v.pass) v.detail = fmt("max deviation: sign %.4f (tol 0.005), L2 %.4f (tol 0.002)", worst_sign, worst_l2);
    return v;
}

std::unique_ptr<MipsIndex> build_for(Algorithm algo, std::shared_ptr<const DatasetView> data, std::uint64_t seed,
                                     unsigned bits, std::uint32_t partitions) {
    ExperimentConfig cfg;
    cfg.synthetic = SyntheticSpec{};
    cfg.algorithm = algo;
    cfg.bits = bits;
    cfg.partitions = partitions;
    cfg.seed = seed;
    return build_index(cfg, std::move(data));
}

// 3. Oracle equivalence at full budget.
Verdict oracle_equivalence() {
    Verdict v;
    const auto data = lognormal_data(2000, 16, 303);
    const DatasetView qs = generate_synthetic_queries(100, 16, 303);
    int mismatches = 0;
    for (Algorithm algo : {Algorithm::Simple, Algorithm::Range, Algorithm::Alsh, Algorithm::RangedAlsh}) {
        const bool alsh = algo == Algorithm::Alsh || algo == Algorithm::RangedAlsh;
        const auto index = build_for(algo, data, 303, alsh ? 16 : 32, 32);
        int bad = 0;
        for (std::size_t i = 0; i < qs.size(); ++i) {
            bad += index->query(qs[i], data->size(), 10, false).top != brute_force_topk(*data, qs[i], 10);
        }
        v.require(bad == 0, std::string(algorithm_name(algo)) + ": " + std::to_string(bad) + " queries differ");
        mismatches += bad;
    }
    if (v.pass) v.detail = "4 algorithms x 100 queries match brute-force top-10";
    return v;
}

// 4. m = 1 degeneracy.
Verdict degeneracy() {
    Verdict v;
    const auto data = lognormal_data(5000, 20, 404);
    const RangeIndex range = build_range_index(data, 32, 1, PartitionScheme::Percentile, kDefaultEpsilon, 404);
    const SimpleIndex simple = build_simple_index(data, 32, 404);
    const DatasetView qs = generate_synthetic_queries(100, 20, 404);
    int bad = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        for (std::uint64_t budget : {1u, 16u, 256u, 1024u, 5000u}) {
            const QueryResult a = query_range(range, qs[i], budget, 10);
            const QueryResult b = query_multiprobe(simple, qs[i], budget, 10);
            bad += a.top != b.top || a.probed_items != b.probed_items;
        }
    }
    v.require(bad == 0, std::to_string(bad) + " of 500 (query, budget) pairs differ");
    if (v.pass) v.detail = "500 (query, budget) pairs identical in top-k and probe count";
    return v;
}

// 5. rho calculator checks.
Verdict rho_checks() {
    Verdict v;
    double worst_limit = 0.0;
    for (double s0 : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        worst_limit = std::max(worst_limit, std::abs(theory::rho_simple(1.0 - 1e-9, s0) - 1.0));
    }
    v.require(worst_limit < 1e-6, fmt("|rho - 1| = %.3g at c = 1 - 1e-9", worst_limit));
    bool decreasing = true;
    double prev = 2.0;
    for (int i = 1; i <= 9; ++i) {
        const double rho = theory::rho_simple(0.5, i / 10.0);
        decreasing = decreasing && rho < prev;
        prev = rho;
    }
    v.require(decreasing, "rho_simple not strictly decreasing in S0");
    Rng rng(505);
    int draws = 0, improved = 0;
    while (draws < 200) {
        const double s0 = rng.uniform(0.5, 1.0);
        const double u = rng.uniform(0.6, 0.95);
        const unsigned m = 1 + static_cast<unsigned>(rng.uniform() * 3);
        const double c = rng.uniform(0.2, 0.9);
        const double r = rng.uniform(1.0, 4.0);
        const double lo = rng.uniform(0.5 * s0, s0);
        const double hi = rng.uniform(lo, s0);
        if (!(hi > lo)) continue;
        double ranged = 0.0, plain = 0.0;
        try {
            ranged = theory::rho_alsh_ranged(c, s0, m, u, r, lo, hi);
            plain = theory::rho_alsh(c, s0, m, u, r);
        } catch (const Error&) {
            continue;
        }
        ++draws;
        improved += ranged < plain;
    }
    v.require(improved == 200, std::to_string(improved) + " of 200 ranged draws improve");
    if (v.pass) v.detail = fmt("limit error %.2g; 9-point decrease; %.0f/200 ranged draws strictly lower", worst_limit,
                               improved);
    return v;
}

// 6. Theorem 1 numeric machinery.
Verdict theorem_checks() {
    Verdict v;
    v.require(theory::check_theorem1(1e6, 0.3, 0.2, 0.8, 0.5).holds, "check_theorem1 false");
    double prev = 1e300;
    std::string values;
    for (double n : {1e3, 1e6, 1e9, 1e12}) {
        const double r = theory::complexity_ratio(n, 0.3, 0.2, 0.8, 0.5);
        v.require(r < prev, fmt("ratio not decreasing at n=%.0e", n));
        prev = r;
        values += fmt(values.empty() ? "%.4f" : " > %.4f", r);
    }
    if (v.pass) v.detail = "conditions hold; ratio " + values;
    return v;
}

struct SeedRun {
    std::shared_ptr<const DatasetView> data;
    DatasetView queries;
    GroundTruth truth;
};

SeedRun prepare(std::uint64_t seed) {
    SeedRun run;
    run.data = lognormal_data(100000, 50, seed);
    run.queries = generate_synthetic_queries(200, 50, seed);
    run.truth = compute_ground_truth(*run.data, run.queries, 10);
    return run;
}

// 7. Bucket balance.
Verdict bucket_balance(const std::vector<SeedRun>& runs) {
    Verdict v;
    std::string detail;
    for (std::size_t s = 0; s < 3; ++s) {
        const std::uint64_t seed = s + 1;
        const BucketStats r =
            bucket_stats(build_range_index(runs[s].data, 32, 32, PartitionScheme::Percentile, kDefaultEpsilon, seed));
        const BucketStats b = bucket_stats(build_simple_index(runs[s].data, 32, seed));
        const bool ok = r.non_empty_buckets >= 5 * b.non_empty_buckets && 10 * r.largest_bucket <= b.largest_bucket;
        v.require(ok, "seed " + std::to_string(seed) + " out of balance");
        detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + ": buckets " +
                  std::to_string(r.non_empty_buckets) + " vs " + std::to_string(b.non_empty_buckets) + ", largest " +
                  std::to_string(r.largest_bucket) + " vs " + std::to_string(b.largest_bucket);
    }
    v.detail = v.pass ? detail : v.detail + " (" + detail + ")";
    return v;
}

RecallCurve measure(const SeedRun& run, Algorithm algo, PartitionScheme scheme, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.synthetic = SyntheticSpec{};
    cfg.algorithm = algo;
    cfg.bits = 32;
    cfg.partitions = 32;
    cfg.scheme = scheme;
    cfg.seed = seed;
    cfg.k = 10;
    const auto index = build_index(cfg, run.data);
    const auto budgets = default_budgets(run.data->size());
    RecallCurve curve;
    curve.points.resize(budgets.size());
    for (std::size_t b = 0; b < budgets.size(); ++b) curve.points[b].budget = budgets[b];
    for (std::size_t qi = 0; qi < run.queries.size(); ++qi) {
        const auto pts = query_budgets(*index, run.queries[qi], budgets, 10);
        for (std::size_t b = 0; b < pts.size(); ++b) {
            curve.points[b].mean_probed += static_cast<double>(pts[b].probed_items);
            curve.points[b].mean_recall += recall_at_k(std::span<const Neighbor>(pts[b].top), run.truth.rows[qi]);
        }
    }
    for (auto& p : curve.points) {
        p.mean_probed /= static_cast<double>(run.queries.size());
        p.mean_recall /= static_cast<double>(run.queries.size());
    }
    return curve;
}

// Recall of a curve at `probed` items, linear between points, from (0, 0).
double recall_at_probed(const RecallCurve& c, double probed) {
    double x0 = 0.0, y0 = 0.0;
    for (const CurvePoint& p : c.points) {
        if (p.mean_probed >= probed) {
            if (p.mean_probed == x0) return p.mean_recall;
            return y0 + (probed - x0) / (p.mean_probed - x0) * (p.mean_recall - y0);
        }
        x0 = p.mean_probed;
        y0 = p.mean_recall;
    }
    return y0;
}

struct Dominance {
    bool ratio_ok = false;
    bool dominates = false;
    double ratio = 0.0;
    double worst_gap = 0.0;  // most negative recall difference on the probed axis
};

Dominance dominance(const RecallCurve& range, const RecallCurve& simple) {
    Dominance d;
    const auto pr = probes_at_recall(range, 0.8);
    const auto ps = probes_at_recall(simple, 0.8);
    d.ratio = pr && ps ? *pr / *ps : INFINITY;
    d.ratio_ok = d.ratio <= 0.5;
    std::vector<double> xs;
    for (const auto* c : {&range, &simple}) {
        for (const CurvePoint& p : c->points) {
            if (p.mean_probed >= 256.0) xs.push_back(p.mean_probed);
        }
    }
    for (const CurvePoint& p : range.points) {
        if (p.budget >= 256) xs.push_back(static_cast<double>(p.budget));
    }
    d.worst_gap = 0.0;
    for (double x : xs) d.worst_gap = std::min(d.worst_gap, recall_at_probed(range, x) - recall_at_probed(simple, x));
    d.dominates = d.worst_gap >= -1e-12;
    return d;
}

struct RecallStudy {
    Verdict percentile;
    Verdict uniform;
};

// 8 and 9. Recall dominance for each partition scheme.
RecallStudy recall_dominance(const std::vector<SeedRun>& runs) {
    RecallStudy study;
    int pct_ok = 0, uni_ok = 0;
    std::string pct_detail, uni_detail;
    for (std::size_t s = 0; s < runs.size(); ++s) {
        const std::uint64_t seed = s + 1;
        const RecallCurve simple = measure(runs[s], Algorithm::Simple, PartitionScheme::Percentile, seed);
        const RecallCurve pct = measure(runs[s], Algorithm::Range, PartitionScheme::Percentile, seed);
        const RecallCurve uni = measure(runs[s], Algorithm::Range, PartitionScheme::Uniform, seed);
        const Dominance dp = dominance(pct, simple);
        const Dominance du = dominance(uni, simple);
        pct_ok += dp.ratio_ok && dp.dominates;
        uni_ok += du.ratio_ok && du.dominates;
        pct_detail += fmt(" [ratio %.3f, gap %.3f]", dp.ratio, dp.worst_gap);
        uni_detail += fmt(" [ratio %.3f, gap %.3f]", du.ratio, du.worst_gap);
    }
    study.percentile.require(pct_ok >= 4, "percentile");
    study.uniform.require(uni_ok >= 4, "uniform");
    study.percentile.detail = "percentile " + std::to_string(pct_ok) + "/5 seeds:" + pct_detail;
    study.uniform.detail = "uniform " + std::to_string(uni_ok) + "/5 seeds:" + uni_detail;
    return study;
}

std::string trace_text(const MipsIndex& index, const DatasetView& qs) {
    std::ostringstream out;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const QueryResult r = index.query(qs[i], 500, 10);
        for (const auto& p : r.trace) {
            out << i << ',' << p.partition << ',' << p.matches << ',' << p.bucket << ',' << p.probed_so_far << '\n';
        }
        for (const auto& n : r.top) out << n.id << ' ';
        out << '\n';
    }
    return out.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 10. Determinism and snapshot fidelity.
Verdict determinism() {
    Verdict v;
    const auto dir = std::filesystem::temp_directory_path() / "rangelsh_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto data = lognormal_data(5000, 16, 1010);
    const DatasetView qs = generate_synthetic_queries(100, 16, 1010);
    for (Algorithm algo : {Algorithm::Simple, Algorithm::Range, Algorithm::Alsh, Algorithm::RangedAlsh}) {
        const bool alsh = algo == Algorithm::Alsh || algo == Algorithm::RangedAlsh;
        const auto index = build_for(algo, data, 1010, alsh ? 12 : 32, 16);
        const auto path = dir / (std::string(algorithm_name(algo)) + ".idx");
        save_index(*index, path);
        const auto loaded = load_index(path, data);
        v.require(trace_text(*index, qs) == trace_text(*loaded, qs),
                  std::string(algorithm_name(algo)) + " traces differ after reload");
    }
    const std::string d = (dir / "d.fvecs").string(), q = (dir / "q.fvecs").string();
    std::ostringstream sink;
    rangelsh::cli::run({"synth", "--n", "4000", "--d", "16", "--seed", "7", "--out", d, "--queries", "100",
                        "--queries-out", q},
                       sink, sink);
    for (const char* algo : {"simple", "range", "alsh", "ranged-alsh"}) {
        const std::string bits = std::string(algo).find("alsh") != std::string::npos ? "12" : "32";
        std::vector<std::string> outputs;
        for (const char* tag : {"a", "b"}) {
            const std::string prefix = (dir / (std::string(algo) + tag)).string();
            const int rc = rangelsh::cli::run({"bench", "--data", d, "--queries", q, "--seed", "7", "--algo", algo,
                                               "-L", bits, "-m", "16", "--out", prefix},
                                              sink, sink);
            v.require(rc == 0, std::string("bench failed for ") + algo);
            outputs.push_back(slurp(prefix + ".csv") + slurp(prefix + ".json") + slurp(prefix + ".diag.json"));
        }
        v.require(!outputs[0].empty() && outputs[0] == outputs[1], std::string(algo) + " outputs differ across reruns");
    }
    std::filesystem::remove_all(dir);
    if (v.pass) v.detail = "4 snapshot round trips with identical traces; 4 bench reruns byte-identical";
    return v;
}

int failures = 0;

void report(int number, const char* name, double limit_seconds, const std::function<Verdict()>& body) {
    const auto start = Clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v.pass = false;
        v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (limit_seconds > 0.0 && secs > limit_seconds) {
        v.require(false, fmt("took %.1f s, limit %.0f s", secs, limit_seconds));
    }
    if (!v.pass) ++failures;
    std::printf("criterion %d %s: %s (%.2f s) %s\n", number, name, v.pass ? "PASS" : "FAIL", secs, v.detail.c_str());
    std::fflush(stdout);
}

}  // namespace

int main() {
    report(1, "transform identities", 1.0, transform_identities);
    report(2, "collision calibration", 30.0, collision_calibration);
    report(3, "oracle equivalence", 10.0, oracle_equivalence);
    report(4, "single-partition degeneracy", 0.0, degeneracy);
    report(5, "rho calculators", 1.0, rho_checks);
    report(6, "theorem machinery", 0.0, theorem_checks);

    std::vector<SeedRun> runs;
    report(7, "bucket balance", 120.0, [&] {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) runs.push_back(prepare(seed));
        return bucket_balance(runs);
    });
    RecallStudy study;
    report(8, "recall dominance", 300.0, [&] {
        for (std::uint64_t seed = runs.size() + 1; seed <= 5; ++seed) runs.push_back(prepare(seed));
        study = recall_dominance(runs);
        return study.percentile;
    });
    report(9, "scheme robustness", 0.0, [&] {
        Verdict v;
        v.require(study.percentile.pass, "percentile misses criterion 8");
        v.require(study.uniform.pass, "uniform misses criterion 8");
        v.detail = study.uniform.detail + "; " + study.percentile.detail;
        return v;
    });
    report(10, "determinism and snapshots", 0.0, determinism);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
