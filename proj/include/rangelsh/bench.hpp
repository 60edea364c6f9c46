#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rangelsh/dataset.hpp"
#include "rangelsh/oracle.hpp"
#include "rangelsh/query.hpp"
#include "rangelsh/range_index.hpp"
#include "rangelsh/simple_index.hpp"
#include "rangelsh/transforms.hpp"

namespace rangelsh {

enum class NormDistribution { LogNormal, Constant, Uniform };

struct SyntheticSpec {
    std::size_t n = 0;
    std::size_t dim = 0;
    NormDistribution distribution = NormDistribution::LogNormal;
    /// lognormal: (mu, sigma); constant: (value, unused); uniform: (a, b)
    double param_a = 0.0;
    double param_b = 1.0;
    std::uint64_t seed = 0;
};

/// Parses "lognormal:MU,SIGMA", "constant:V" or "uniform:A,B".
void parse_distribution(std::string_view text, SyntheticSpec& spec);
std::string distribution_text(const SyntheticSpec& spec);

/// Directions are normalized standard normals; norms come from the spec's
/// distribution. Directions and norms share one seeded stream.
DatasetView generate_synthetic(const SyntheticSpec& spec);

/// `count` unit queries drawn uniformly on the sphere from its own stream.
DatasetView generate_synthetic_queries(std::size_t count, std::size_t dim, std::uint64_t seed);

enum class Algorithm { Simple, Range, Alsh, RangedAlsh };

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm algo);

struct ExperimentConfig {
    std::filesystem::path data_path;
    FileFormat data_format = FileFormat::Fvecs;
    std::filesystem::path query_path;
    FileFormat query_format = FileFormat::Fvecs;
    /// Used when data_path is empty.
    std::optional<SyntheticSpec> synthetic;

    Algorithm algorithm = Algorithm::Range;
    unsigned bits = 32;
    std::uint32_t partitions = 32;
    PartitionScheme scheme = PartitionScheme::Percentile;
    double epsilon = kDefaultEpsilon;
    AlshTransformConfig alsh;  // alsh.scale is the headroom ratio U * maxNorm
    std::size_t k = 10;
    /// Empty: powers of two below n, then n.
    std::vector<std::uint64_t> budgets;
    std::uint64_t seed = 0;
    /// Queries sampled (with a seeded shuffle) from the query set; 0 = all.
    std::size_t query_sample = 1000;
    /// Directory for the ground-truth cache; empty disables caching.
    std::filesystem::path truth_cache;

    void validate() const;
};

/// Powers of two below n followed by n itself.
std::vector<std::uint64_t> default_budgets(std::uint64_t n);

struct CurvePoint {
    std::uint64_t budget = 0;
    double mean_probed = 0.0;
    double mean_recall = 0.0;
};

struct StageTimes {
    double load_seconds = 0.0;
    double truth_seconds = 0.0;
    double build_seconds = 0.0;
    double query_seconds = 0.0;
};

struct RecallCurve {
    std::vector<CurvePoint> points;
    std::string label;
    std::string config_echo;  // one-line key=value rendering of the config
    std::size_t k = 0;
    std::uint64_t dataset_fingerprint = 0;
    StageTimes times;
};

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
    double mean = 0.0;
};

/// Distribution over queries of the largest inner product after normalization:
/// max_x q.x / U with the global max norm, and max_x q.x / U_j(x) with each
/// item divided by its own partition's normalizer.
struct NormalizedMaxIp {
    Histogram global;
    Histogram partitioned;
};

struct ExperimentReport {
    RecallCurve curve;
    BucketStats buckets;
    NormStats norms;
    NormalizedMaxIp max_ip;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Same as run_experiment on already-loaded data.
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::shared_ptr<const DatasetView> data,
                                const DatasetView& queries);

/// Builds the index an experiment config describes.
std::unique_ptr<MipsIndex> build_index(const ExperimentConfig& cfg, std::shared_ptr<const DatasetView> data);

BucketStats index_bucket_stats(const MipsIndex& index);

NormalizedMaxIp normalized_max_ip(const DatasetView& data, const DatasetView& queries, const GroundTruth& truth,
                                  const PartitionSpec& spec, std::size_t bins = 20);

inline const std::vector<double> kRecallTargets = {0.5, 0.8, 0.9, 0.95};

struct ComparisonTable {
    std::vector<double> targets;
    std::vector<std::string> labels;
    /// cells[curve][target]: probed items to reach the target, empty if never
    std::vector<std::vector<std::optional<double>>> cells;
};

/// Probed items at which a curve first reaches `target`, interpolating
/// linearly between the bracketing points.
std::optional<double> probes_at_recall(const RecallCurve& curve, double target);

ComparisonTable compare_runs(const std::vector<RecallCurve>& curves,
                             const std::vector<double>& targets = kRecallTargets);

std::string curve_csv(const RecallCurve& curve);
std::string curve_json(const RecallCurve& curve);
RecallCurve parse_curve_json(const std::string& text);
std::string diagnostics_json(const ExperimentReport& report);
std::string comparison_text(const ComparisonTable& table);

}  // namespace rangelsh
