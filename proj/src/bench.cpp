#include "rangelsh/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "rangelsh/alsh_index.hpp"
#include "rangelsh/error.hpp"
#include "rangelsh/random.hpp"

namespace rangelsh {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr std::uint64_t kQueryStream = 0x51ed2701a3c4b5d6ULL;
constexpr std::uint64_t kSampleStream = 0x2545f4914f6cdd1dULL;

void unit_direction(Rng& rng, std::span<double> out) {
    for (;;) {
        double sq = 0.0;
        for (double& v : out) {
            v = rng.normal();
            sq += v * v;
        }
        if (sq > 0.0) {
            const double inv = 1.0 / std::sqrt(sq);
            for (double& v : out) v *= inv;
            return;
        }
    }
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

Histogram histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins) {
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(bins, 0);
    double sum = 0.0;
    for (double v : values) {
        auto bin = static_cast<std::ptrdiff_t>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
        bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(bins) - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
        sum += v;
    }
    h.mean = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
    return h;
}

DatasetView sample_queries(const DatasetView& queries, std::size_t sample, std::uint64_t seed) {
    if (sample == 0 || sample >= queries.size()) return queries;
    std::vector<std::uint32_t> order(queries.size());
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(derive_seed(seed, kSampleStream));
    for (std::size_t i = 0; i < sample; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (order.size() - i));
        std::swap(order[i], order[j]);
    }
    order.resize(sample);
    std::sort(order.begin(), order.end());
    std::vector<double> flat;
    flat.reserve(sample * queries.dim());
    for (std::uint32_t id : order) flat.insert(flat.end(), queries[id].begin(), queries[id].end());
    return DatasetView(std::move(flat), queries.dim());
}

std::string curve_label(const ExperimentConfig& cfg) {
    std::string label(algorithm_name(cfg.algorithm));
    label += "-L" + std::to_string(cfg.bits);
    if (cfg.algorithm == Algorithm::Range || cfg.algorithm == Algorithm::RangedAlsh) {
        label += "-m" + std::to_string(cfg.partitions) + "-" + std::string(scheme_name(cfg.scheme));
    }
    return label;
}

std::string config_echo(const ExperimentConfig& cfg, const DatasetView& data, const DatasetView& queries) {
    std::ostringstream os;
    os << "algorithm=" << algorithm_name(cfg.algorithm) << " bits=" << cfg.bits << " partitions=" << cfg.partitions
       << " scheme=" << scheme_name(cfg.scheme) << " epsilon=" << fmt_double(cfg.epsilon)
       << " alsh_m=" << cfg.alsh.m << " alsh_headroom=" << fmt_double(cfg.alsh.scale)
       << " alsh_r=" << fmt_double(cfg.alsh.width) << " k=" << cfg.k << " seed=" << cfg.seed
       << " n=" << data.size() << " d=" << data.dim() << " queries=" << queries.size();
    if (cfg.synthetic) os << " synthetic=" << distribution_text(*cfg.synthetic);
    os << " dataset=" << hex64(data.fingerprint());
    return os.str();
}

}  // namespace

void parse_distribution(std::string_view text, SyntheticSpec& spec) {
    const auto colon = text.find(':');
    const std::string_view kind = text.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string_view::npos) {
        std::stringstream ss{std::string(text.substr(colon + 1))};
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                params.push_back(std::stod(cell));
            } catch (const std::exception&) {
                fail("bad distribution parameter '" + cell + "'");
            }
        }
    }
    if (kind == "lognormal") {
        if (params.size() != 2 || !(params[1] >= 0.0)) fail("lognormal needs MU,SIGMA with SIGMA >= 0");
        spec.distribution = NormDistribution::LogNormal;
    } else if (kind == "constant") {
        if (params.size() != 1 || !(params[0] > 0.0)) fail("constant needs one positive value");
        params.push_back(0.0);
        spec.distribution = NormDistribution::Constant;
    } else if (kind == "uniform") {
        if (params.size() != 2 || !(params[0] >= 0.0 && params[0] <= params[1])) {
            fail("uniform needs A,B with 0 <= A <= B");
        }
        spec.distribution = NormDistribution::Uniform;
    } else {
        fail("unknown norm distribution '" + std::string(kind) + "'");
    }
    spec.param_a = params[0];
    spec.param_b = params[1];
}

std::string distribution_text(const SyntheticSpec& spec) {
    switch (spec.distribution) {
        case NormDistribution::LogNormal:
            return "lognormal:" + fmt_double(spec.param_a) + "," + fmt_double(spec.param_b);
        case NormDistribution::Constant: return "constant:" + fmt_double(spec.param_a);
        case NormDistribution::Uniform:
            return "uniform:" + fmt_double(spec.param_a) + "," + fmt_double(spec.param_b);
    }
    return "?";
}

DatasetView generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n == 0 || spec.dim == 0) fail("synthetic data needs n >= 1 and d >= 1");
    switch (spec.distribution) {
        case NormDistribution::LogNormal:
            if (!(spec.param_b >= 0.0) || !std::isfinite(spec.param_a)) fail("invalid lognormal parameters");
            break;
        case NormDistribution::Constant:
            if (!(spec.param_a > 0.0)) fail("constant norm must be positive");
            break;
        case NormDistribution::Uniform:
            if (!(spec.param_a >= 0.0 && spec.param_a <= spec.param_b)) fail("invalid uniform norm range");
            break;
    }
    Rng rng(spec.seed);
    std::vector<double> flat(spec.n * spec.dim);
    for (std::size_t i = 0; i < spec.n; ++i) {
        std::span<double> row(flat.data() + i * spec.dim, spec.dim);
        unit_direction(rng, row);
        double norm = spec.param_a;
        if (spec.distribution == NormDistribution::LogNormal) {
            norm = std::exp(spec.param_a + spec.param_b * rng.normal());
        } else if (spec.distribution == NormDistribution::Uniform) {
            norm = rng.uniform(spec.param_a, spec.param_b);
        }
        for (double& v : row) v *= norm;
    }
    return DatasetView(std::move(flat), spec.dim);
}

DatasetView generate_synthetic_queries(std::size_t count, std::size_t dim, std::uint64_t seed) {
    if (count == 0 || dim == 0) fail("synthetic queries need count >= 1 and d >= 1");
    Rng rng(derive_seed(seed, kQueryStream));
    std::vector<double> flat(count * dim);
    for (std::size_t i = 0; i < count; ++i) unit_direction(rng, std::span<double>(flat.data() + i * dim, dim));
    return DatasetView(std::move(flat), dim);
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "simple") return Algorithm::Simple;
    if (name == "range") return Algorithm::Range;
    if (name == "alsh") return Algorithm::Alsh;
    if (name == "ranged-alsh") return Algorithm::RangedAlsh;
    fail("unknown algorithm '" + std::string(name) + "' (expected simple, range, alsh or ranged-alsh)");
}

std::string_view algorithm_name(Algorithm algo) {
    switch (algo) {
        case Algorithm::Simple: return "simple";
        case Algorithm::Range: return "range";
        case Algorithm::Alsh: return "alsh";
        case Algorithm::RangedAlsh: return "ranged-alsh";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (data_path.empty() && !synthetic) fail("config needs a dataset path or a synthetic spec");
    if (bits == 0 || bits > 64) fail("bits must be in [1, 64]");
    if (partitions == 0) fail("partitions must be at least 1");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) fail("epsilon must lie in [0, 1)");
    if (k == 0) fail("k must be at least 1");
    if (alsh.m == 0) fail("alsh m must be at least 1");
    if (!(alsh.scale > 0.0 && alsh.scale < 1.0)) fail("alsh headroom must lie in (0, 1)");
    if (!(alsh.width > 0.0)) fail("alsh r must be positive");
    for (std::size_t i = 0; i < budgets.size(); ++i) {
        if (budgets[i] == 0) fail("budgets must be positive");
        if (i > 0 && budgets[i] <= budgets[i - 1]) fail("budget grid must be strictly increasing");
    }
    if (algorithm == Algorithm::Range && bits <= index_bits_for(partitions)) {
        fail("bits must exceed the " + std::to_string(index_bits_for(partitions)) + " partition-index bits");
    }
}

std::vector<std::uint64_t> default_budgets(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t b = 1; b < n; b *= 2) out.push_back(b);
    out.push_back(n);
    return out;
}

std::unique_ptr<MipsIndex> build_index(const ExperimentConfig& cfg, std::shared_ptr<const DatasetView> data) {
    switch (cfg.algorithm) {
        case Algorithm::Simple:
            return std::make_unique<SimpleIndex>(SimpleIndex::build(std::move(data), cfg.bits, cfg.seed));
        case Algorithm::Range:
            return std::make_unique<RangeIndex>(
                RangeIndex::build(std::move(data), cfg.bits, cfg.partitions, cfg.scheme, cfg.epsilon, cfg.seed));
        case Algorithm::Alsh: {
            AlshTransformConfig alsh = cfg.alsh;
            alsh.scale = alsh_scale_for(cfg.alsh.scale, data->max_norm());
            return std::make_unique<AlshIndex>(AlshIndex::build(std::move(data), alsh, cfg.bits, cfg.seed));
        }
        case Algorithm::RangedAlsh:
            return std::make_unique<RangedAlshIndex>(RangedAlshIndex::build(
                std::move(data), cfg.partitions, cfg.scheme, cfg.alsh, cfg.bits, cfg.seed));
    }
    fail_invariant("unhandled algorithm");
}

BucketStats index_bucket_stats(const MipsIndex& index) {
    if (auto* s = dynamic_cast<const SimpleIndex*>(&index)) return bucket_stats(*s);
    if (auto* r = dynamic_cast<const RangeIndex*>(&index)) return bucket_stats(*r);
    if (auto* a = dynamic_cast<const AlshIndex*>(&index)) return bucket_stats(*a);
    if (auto* ra = dynamic_cast<const RangedAlshIndex*>(&index)) return bucket_stats(*ra);
    fail_invariant("unknown index type");
}

NormalizedMaxIp normalized_max_ip(const DatasetView& data, const DatasetView& queries, const GroundTruth& truth,
                                  const PartitionSpec& spec, std::size_t bins) {
    if (truth.rows.size() != queries.size()) fail_invariant("ground truth does not match the query set");
    std::vector<double> inverse(spec.count, 0.0);
    for (std::uint32_t j = 0; j < spec.count; ++j) {
        if (spec.normalizer[j] > 0.0) inverse[j] = 1.0 / spec.normalizer[j];
    }
    std::vector<double> global;
    std::vector<double> local;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        if (truth.rows[qi].empty()) continue;
        global.push_back(truth.rows[qi].front().score / data.max_norm());
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < data.size(); ++i) {
            best = std::max(best, dot(data[i], queries[qi]) * inverse[spec.assignment[i]]);
        }
        local.push_back(best);
    }
    return {histogram(global, -1.0, 1.0, bins), histogram(local, -1.0, 1.0, bins)};
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = Clock::now();
    std::shared_ptr<const DatasetView> data;
    DatasetView queries;
    if (!cfg.data_path.empty()) {
        data = std::make_shared<const DatasetView>(load_dataset(cfg.data_path, cfg.data_format));
    } else {
        data = std::make_shared<const DatasetView>(generate_synthetic(*cfg.synthetic));
    }
    if (!cfg.query_path.empty()) {
        queries = normalize_queries(load_dataset(cfg.query_path, cfg.query_format));
        queries = sample_queries(queries, cfg.query_sample, cfg.seed);
    } else {
        queries = generate_synthetic_queries(cfg.query_sample == 0 ? 1000 : cfg.query_sample, data->dim(), cfg.seed);
    }
    const double load_seconds = seconds_since(start);
    ExperimentReport report = run_experiment(cfg, data, queries);
    report.curve.times.load_seconds = load_seconds;
    return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::shared_ptr<const DatasetView> data,
                                const DatasetView& queries) {
    cfg.validate();
    if (!data || data->empty()) fail("empty dataset");
    if (queries.empty()) fail("no queries");
    if (queries.dim() != data->dim()) fail("query dimension does not match the dataset");
    ExperimentReport report;

    auto stage = Clock::now();
    const GroundTruth truth = cfg.truth_cache.empty() ? compute_ground_truth(*data, queries, cfg.k)
                                                      : cached_ground_truth(*data, queries, cfg.k, cfg.truth_cache);
    report.curve.times.truth_seconds = seconds_since(stage);

    stage = Clock::now();
    const auto index = build_index(cfg, data);
    report.curve.times.build_seconds = seconds_since(stage);

    const auto budgets = cfg.budgets.empty() ? default_budgets(data->size()) : cfg.budgets;
    std::vector<double> probed_sum(budgets.size(), 0.0);
    std::vector<double> recall_sum(budgets.size(), 0.0);
    stage = Clock::now();
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto points = query_budgets(*index, queries[qi], budgets, cfg.k);
        for (std::size_t b = 0; b < points.size(); ++b) {
            probed_sum[b] += static_cast<double>(points[b].probed_items);
            recall_sum[b] += recall_at_k(std::span<const Neighbor>(points[b].top), truth.rows[qi]);
        }
    }
    report.curve.times.query_seconds = seconds_since(stage);

    const double nq = static_cast<double>(queries.size());
    for (std::size_t b = 0; b < budgets.size(); ++b) {
        report.curve.points.push_back({budgets[b], probed_sum[b] / nq, recall_sum[b] / nq});
    }
    report.curve.label = curve_label(cfg);
    report.curve.config_echo = config_echo(cfg, *data, queries);
    report.curve.k = cfg.k;
    report.curve.dataset_fingerprint = data->fingerprint();

    report.buckets = index_bucket_stats(*index);
    const std::vector<double> grid = {0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0};
    report.norms = norm_stats(*data, grid);
    const std::uint32_t parts =
        static_cast<std::uint32_t>(std::min<std::size_t>(cfg.partitions, data->size()));
    const PartitionSpec spec = partition(*data, parts, cfg.scheme);
    report.max_ip = normalized_max_ip(*data, queries, truth, spec);
    return report;
}

std::optional<double> probes_at_recall(const RecallCurve& curve, double target) {
    const auto& pts = curve.points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].mean_recall < target) continue;
        if (i == 0 || pts[i].mean_recall == pts[i - 1].mean_recall) return pts[i].mean_probed;
        const auto& a = pts[i - 1];
        const auto& b = pts[i];
        const double t = (target - a.mean_recall) / (b.mean_recall - a.mean_recall);
        return a.mean_probed + t * (b.mean_probed - a.mean_probed);
    }
    return std::nullopt;
}

ComparisonTable compare_runs(const std::vector<RecallCurve>& curves, const std::vector<double>& targets) {
    if (curves.empty()) fail("nothing to compare");
    for (const RecallCurve& c : curves) {
        if (c.k != curves.front().k) fail("curves use different k");
        if (c.dataset_fingerprint != curves.front().dataset_fingerprint) fail("curves come from different datasets");
    }
    ComparisonTable table;
    table.targets = targets;
    for (const RecallCurve& c : curves) {
        table.labels.push_back(c.label);
        std::vector<std::optional<double>> row;
        for (double t : targets) row.push_back(probes_at_recall(c, t));
        table.cells.push_back(std::move(row));
    }
    return table;
}

std::string curve_csv(const RecallCurve& curve) {
    std::string out = "# " + curve.label + " " + curve.config_echo + "\n";
    out += "budget,mean_probed,mean_recall\n";
    char line[128];
    for (const CurvePoint& p : curve.points) {
        std::snprintf(line, sizeof line, "%llu,%.6f,%.6f\n", static_cast<unsigned long long>(p.budget),
                      p.mean_probed, p.mean_recall);
        out += line;
    }
    return out;
}

std::string curve_json(const RecallCurve& curve) {
    nlohmann::json j;
    j["label"] = curve.label;
    j["config"] = curve.config_echo;
    j["k"] = curve.k;
    j["dataset_fingerprint"] = hex64(curve.dataset_fingerprint);
    j["points"] = nlohmann::json::array();
    for (const CurvePoint& p : curve.points) {
        j["points"].push_back({{"budget", p.budget}, {"mean_probed", p.mean_probed}, {"mean_recall", p.mean_recall}});
    }
    return j.dump(2) + "\n";
}

RecallCurve parse_curve_json(const std::string& text) {
    RecallCurve curve;
    try {
        const auto j = nlohmann::json::parse(text);
        curve.label = j.at("label").get<std::string>();
        curve.config_echo = j.value("config", "");
        curve.k = j.at("k").get<std::size_t>();
        curve.dataset_fingerprint = std::stoull(j.at("dataset_fingerprint").get<std::string>(), nullptr, 16);
        for (const auto& p : j.at("points")) {
            curve.points.push_back({p.at("budget").get<std::uint64_t>(), p.at("mean_probed").get<double>(),
                                    p.at("mean_recall").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("malformed curve JSON: ") + e.what());
    }
    return curve;
}

std::string diagnostics_json(const ExperimentReport& report) {
    nlohmann::json j;
    auto& b = j["buckets"];
    b["item_count"] = report.buckets.item_count;
    b["non_empty_buckets"] = report.buckets.non_empty_buckets;
    b["largest_bucket"] = report.buckets.largest_bucket;
    b["size_histogram"] = nlohmann::json::array();
    for (const auto& [size, count] : report.buckets.size_histogram) b["size_histogram"].push_back({size, count});

    auto& n = j["norms"];
    n["max_norm"] = report.norms.max_norm;
    n["median_norm"] = report.norms.median_norm;
    n["histogram"] = report.norms.histogram;
    n["percentiles"] = nlohmann::json::array();
    for (const auto& [f, v] : report.norms.percentiles) n["percentiles"].push_back({f, v});

    auto hist = [](const Histogram& h) {
        return nlohmann::json{{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}, {"mean", h.mean}};
    };
    j["max_inner_product"]["global_normalizer"] = hist(report.max_ip.global);
    j["max_inner_product"]["partition_normalizer"] = hist(report.max_ip.partitioned);
    j["label"] = report.curve.label;
    return j.dump(2) + "\n";
}

std::string comparison_text(const ComparisonTable& table) {
    std::string out = "recall";
    for (const auto& label : table.labels) out += "," + label;
    out += "\n";
    char cell[48];
    for (std::size_t t = 0; t < table.targets.size(); ++t) {
        std::snprintf(cell, sizeof cell, "%.2f", table.targets[t]);
        out += cell;
        for (const auto& row : table.cells) {
            if (row[t]) {
                std::snprintf(cell, sizeof cell, ",%.1f", *row[t]);
                out += cell;
            } else {
                out += ",n/a";
            }
        }
        out += "\n";
    }
    return out;
}

}  // namespace rangelsh
