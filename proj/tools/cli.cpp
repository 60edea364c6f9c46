#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rangelsh/alsh_index.hpp"
#include "rangelsh/bench.hpp"
#include "rangelsh/error.hpp"
#include "rangelsh/oracle.hpp"
#include "rangelsh/snapshot.hpp"

namespace rangelsh::cli {

namespace {

// Library errors raised while reading an input file are reported as I/O failures.
template <class F>
auto reading(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Invariant) throw;
        throw Error(ErrorKind::Io, what + ": " + e.what());
    }
}

std::shared_ptr<const DatasetView> load_shared(const std::string& path, const std::string& format) {
    const FileFormat fmt = parse_format(format);
    return reading("reading " + path,
                   [&] { return std::make_shared<const DatasetView>(load_dataset(path, fmt)); });
}

DatasetView load_queries(const std::string& path, const std::string& format) {
    const FileFormat fmt = parse_format(format);
    DatasetView raw = reading("reading " + path, [&] { return load_dataset(path, fmt); });
    return normalize_queries(raw);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) fail_io("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Options shared by `build` and `bench`.
struct IndexOptions {
    std::string algorithm = "range";
    unsigned bits = 32;
    std::uint32_t partitions = 32;
    std::string scheme = "percentile";
    double epsilon = kDefaultEpsilon;
    unsigned alsh_m = 3;
    double alsh_headroom = 0.83;
    double alsh_r = 2.5;
    std::uint64_t seed = 0;

    CLI::Option* algorithm_opt = nullptr;
    CLI::Option* bits_opt = nullptr;
    CLI::Option* partitions_opt = nullptr;
    CLI::Option* scheme_opt = nullptr;
    CLI::Option* epsilon_opt = nullptr;
    CLI::Option* alsh_m_opt = nullptr;
    CLI::Option* headroom_opt = nullptr;
    CLI::Option* alsh_r_opt = nullptr;
    CLI::Option* seed_opt = nullptr;

    void attach(CLI::App& app) {
        algorithm_opt = app.add_option("--algo", algorithm, "simple | range | alsh | ranged-alsh");
        bits_opt = app.add_option("--bits,-L", bits, "Total code length (hash count for ALSH)");
        partitions_opt = app.add_option("--partitions,-m", partitions, "Number of norm ranges");
        scheme_opt = app.add_option("--scheme", scheme, "percentile | uniform");
        epsilon_opt = app.add_option("--epsilon", epsilon, "Score adjustment in [0, 1)");
        alsh_m_opt = app.add_option("--alsh-m", alsh_m, "ALSH augmentation count");
        headroom_opt = app.add_option("--alsh-headroom", alsh_headroom, "ALSH U * maxNorm");
        alsh_r_opt = app.add_option("--alsh-r", alsh_r, "ALSH bucket width");
        seed_opt = app.add_option("--seed", seed, "RNG seed");
    }

    /// Copies only the options given on the command line.
    void apply(ExperimentConfig& cfg) const {
        if (algorithm_opt->count()) cfg.algorithm = parse_algorithm(algorithm);
        if (bits_opt->count()) cfg.bits = bits;
        if (partitions_opt->count()) cfg.partitions = partitions;
        if (scheme_opt->count()) cfg.scheme = parse_scheme(scheme);
        if (epsilon_opt->count()) cfg.epsilon = epsilon;
        if (alsh_m_opt->count()) cfg.alsh.m = alsh_m;
        if (headroom_opt->count()) cfg.alsh.scale = alsh_headroom;
        if (alsh_r_opt->count()) cfg.alsh.width = alsh_r;
        if (seed_opt->count()) cfg.seed = seed;
    }
};

/// Returns true when the file sets a seed.
bool apply_config_file(const std::filesystem::path& path, ExperimentConfig& cfg) {
    const std::string text = read_text(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    try {
        if (j.contains("data")) cfg.data_path = j["data"].get<std::string>();
        if (j.contains("data_format")) cfg.data_format = parse_format(j["data_format"].get<std::string>());
        if (j.contains("queries")) cfg.query_path = j["queries"].get<std::string>();
        if (j.contains("query_format")) cfg.query_format = parse_format(j["query_format"].get<std::string>());
        if (j.contains("synthetic")) {
            const auto& s = j["synthetic"];
            SyntheticSpec spec;
            spec.n = s.at("n").get<std::size_t>();
            spec.dim = s.at("d").get<std::size_t>();
            parse_distribution(s.value("dist", std::string("lognormal:0,1")), spec);
            cfg.synthetic = spec;
        }
        if (j.contains("algorithm")) cfg.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
        if (j.contains("bits")) cfg.bits = j["bits"].get<unsigned>();
        if (j.contains("partitions")) cfg.partitions = j["partitions"].get<std::uint32_t>();
        if (j.contains("scheme")) cfg.scheme = parse_scheme(j["scheme"].get<std::string>());
        if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
        if (j.contains("alsh_m")) cfg.alsh.m = j["alsh_m"].get<unsigned>();
        if (j.contains("alsh_headroom")) cfg.alsh.scale = j["alsh_headroom"].get<double>();
        if (j.contains("alsh_r")) cfg.alsh.width = j["alsh_r"].get<double>();
        if (j.contains("k")) cfg.k = j["k"].get<std::size_t>();
        if (j.contains("budgets")) cfg.budgets = j["budgets"].get<std::vector<std::uint64_t>>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("query_sample")) cfg.query_sample = j["query_sample"].get<std::size_t>();
        if (j.contains("truth_cache")) cfg.truth_cache = j["truth_cache"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail("bad value in config file: " + std::string(e.what()));
    }
    return j.contains("seed");
}

std::string bucket_stats_json(const BucketStats& stats) {
    nlohmann::json j;
    j["item_count"] = stats.item_count;
    j["non_empty_buckets"] = stats.non_empty_buckets;
    j["largest_bucket"] = stats.largest_bucket;
    return j.dump(2) + "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Norm-ranging LSH for maximum inner product search: index, query and benchmark"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset (and optional unit queries)");
    SyntheticSpec synth_spec;
    std::string synth_dist = "lognormal:0,1";
    std::string synth_out;
    std::string synth_format = "fvecs";
    std::size_t synth_queries = 0;
    std::string synth_query_out;
    synth->add_option("--n", synth_spec.n, "Item count")->required();
    synth->add_option("--d", synth_spec.dim, "Dimension")->required();
    synth->add_option("--dist", synth_dist, "lognormal:MU,SIGMA | constant:V | uniform:A,B");
    synth->add_option("--seed", synth_spec.seed, "RNG seed")->required();
    synth->add_option("--out", synth_out, "Output path")->required();
    synth->add_option("--format", synth_format, "fvecs | csv | raw-f32");
    synth->add_option("--queries", synth_queries, "Also write this many unit queries");
    synth->add_option("--queries-out", synth_query_out, "Query output path");

    // stats
    auto* stats = app.add_subcommand("stats", "Norm distribution and bucket balance diagnostics");
    std::string stats_data;
    std::string stats_format = "fvecs";
    std::string stats_index;
    stats->add_option("--data", stats_data, "Dataset path")->required();
    stats->add_option("--format", stats_format, "Dataset format");
    stats->add_option("--index", stats_index, "Index snapshot for bucket statistics");

    // build
    auto* build = app.add_subcommand("build", "Build an index and write its snapshot");
    IndexOptions build_opts;
    std::string build_data;
    std::string build_format = "fvecs";
    std::string build_out;
    build->add_option("--data", build_data, "Dataset path")->required();
    build->add_option("--format", build_format, "Dataset format");
    build->add_option("--out", build_out, "Snapshot path")->required();
    build_opts.attach(*build);

    // query
    auto* query = app.add_subcommand("query", "Query a saved index");
    std::string query_index;
    std::string query_data;
    std::string query_format = "fvecs";
    std::string query_queries;
    std::string query_qformat = "fvecs";
    std::uint64_t query_budget = 1024;
    std::size_t query_k = 10;
    std::string query_trace;
    query->add_option("--index", query_index, "Snapshot path")->required();
    query->add_option("--data", query_data, "Indexed dataset path")->required();
    query->add_option("--format", query_format, "Dataset format");
    query->add_option("--queries", query_queries, "Query file")->required();
    query->add_option("--query-format", query_qformat, "Query file format");
    query->add_option("--budget", query_budget, "Items to probe");
    query->add_option("--k", query_k, "Results per query");
    query->add_option("--trace", query_trace, "Write the probe trace as CSV");

    // truth
    auto* truth = app.add_subcommand("truth", "Exact top-k ground truth by brute force");
    std::string truth_data;
    std::string truth_format = "fvecs";
    std::string truth_queries;
    std::string truth_qformat = "fvecs";
    std::size_t truth_k = 10;
    std::string truth_out;
    truth->add_option("--data", truth_data, "Dataset path")->required();
    truth->add_option("--format", truth_format, "Dataset format");
    truth->add_option("--queries", truth_queries, "Query file")->required();
    truth->add_option("--query-format", truth_qformat, "Query file format");
    truth->add_option("--k", truth_k, "Neighbors per query");
    truth->add_option("--out", truth_out, "Ground-truth file")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Probed-items vs recall curve");
    IndexOptions bench_opts;
    std::string bench_config;
    std::string bench_data;
    std::string bench_format = "fvecs";
    std::string bench_queries;
    std::string bench_qformat = "fvecs";
    std::size_t bench_n = 0;
    std::size_t bench_d = 0;
    std::string bench_dist = "lognormal:0,1";
    std::size_t bench_k = 10;
    std::size_t bench_sample = 1000;
    std::vector<std::uint64_t> bench_budgets;
    std::string bench_cache;
    std::string bench_out;
    bench->add_option("--config", bench_config, "JSON config file; explicit flags override it");
    bench->add_option("--data", bench_data, "Dataset path");
    bench->add_option("--format", bench_format, "Dataset format");
    bench->add_option("--queries", bench_queries, "Query file (default: synthetic unit queries)");
    bench->add_option("--query-format", bench_qformat, "Query file format");
    auto* n_opt = bench->add_option("--synthetic-n", bench_n, "Synthetic item count (when no --data)");
    auto* d_opt = bench->add_option("--synthetic-d", bench_d, "Synthetic dimension");
    auto* dist_opt = bench->add_option("--synthetic-dist", bench_dist, "Synthetic norm distribution");
    auto* k_opt = bench->add_option("--k", bench_k, "Top-k");
    auto* sample_opt = bench->add_option("--query-sample", bench_sample, "Queries to evaluate (0 = all)");
    auto* budgets_opt = bench->add_option("--budgets", bench_budgets, "Budget grid (default powers of two, then n)");
    auto* cache_opt = bench->add_option("--truth-cache", bench_cache, "Ground-truth cache directory");
    bench->add_option("--out", bench_out, "Output prefix for .csv, .json and .diag.json")->required();
    bench_opts.attach(*bench);

    // compare
    auto* compare = app.add_subcommand("compare", "Probed items at fixed recall targets across curves");
    std::vector<std::string> compare_inputs;
    std::vector<double> compare_targets = kRecallTargets;
    compare->add_option("curves", compare_inputs, "Curve JSON files")->required();
    compare->add_option("--targets", compare_targets, "Recall targets");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (*synth) {
            parse_distribution(synth_dist, synth_spec);
            const DatasetView ds = generate_synthetic(synth_spec);
            save_dataset(ds, synth_out, parse_format(synth_format));
            if (synth_queries > 0) {
                if (synth_query_out.empty()) fail("--queries needs --queries-out");
                const DatasetView qs = generate_synthetic_queries(synth_queries, synth_spec.dim, synth_spec.seed);
                save_dataset(qs, synth_query_out, parse_format(synth_format));
            }
            out << "wrote " << ds.size() << " x " << ds.dim() << " to " << synth_out << "\n";
        } else if (*stats) {
            auto data = load_shared(stats_data, stats_format);
            const std::vector<double> grid = {0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0};
            ExperimentReport report;
            report.norms = norm_stats(*data, grid);
            if (!stats_index.empty()) {
                auto index = reading("reading " + stats_index, [&] { return load_index(stats_index, data); });
                report.buckets = index_bucket_stats(*index);
            }
            out << diagnostics_json(report);
        } else if (*build) {
            ExperimentConfig cfg;
            build_opts.apply(cfg);
            cfg.data_path = build_data;
            cfg.validate();
            auto data = load_shared(build_data, build_format);
            auto index = build_index(cfg, data);
            save_index(*index, build_out);
            out << bucket_stats_json(index_bucket_stats(*index));
        } else if (*query) {
            auto data = load_shared(query_data, query_format);
            auto index = reading("reading " + query_index, [&] { return load_index(query_index, data); });
            const DatasetView qs = load_queries(query_queries, query_qformat);
            std::ofstream trace_out;
            if (!query_trace.empty()) {
                trace_out.open(query_trace, std::ios::binary);
                if (!trace_out) fail_io("cannot open " + query_trace + " for writing");
                trace_out << "query,partition,matches,bucket,probed_so_far\n";
            }
            out << "query,rank,id,inner_product,probed\n";
            char line[160];
            for (std::size_t i = 0; i < qs.size(); ++i) {
                const QueryResult r = index->query(qs[i], query_budget, query_k, !query_trace.empty());
                for (std::size_t rank = 0; rank < r.top.size(); ++rank) {
                    std::snprintf(line, sizeof line, "%zu,%zu,%u,%.9g,%llu\n", i, rank, r.top[rank].id,
                                  r.top[rank].score, static_cast<unsigned long long>(r.probed_items));
                    out << line;
                }
                for (const ProbeRecord& p : r.trace) {
                    trace_out << i << ',' << p.partition << ',' << p.matches << ',' << p.bucket << ','
                              << p.probed_so_far << '\n';
                }
            }
        } else if (*truth) {
            auto data = load_shared(truth_data, truth_format);
            const DatasetView qs = load_queries(truth_queries, truth_qformat);
            const GroundTruth gt = compute_ground_truth(*data, qs, truth_k);
            save_ground_truth(gt, truth_out);
            out << "wrote ground truth for " << qs.size() << " queries (k=" << gt.k << ") to " << truth_out << "\n";
        } else if (*bench) {
            ExperimentConfig cfg;
            bool seeded = false;
            if (!bench_config.empty()) seeded = apply_config_file(bench_config, cfg);
            bench_opts.apply(cfg);
            if (!seeded && bench_opts.seed_opt->count() == 0) fail("bench requires --seed (or a seed in the config file)");
            if (!bench_data.empty()) {
                cfg.data_path = bench_data;
                cfg.data_format = parse_format(bench_format);
            }
            if (!bench_queries.empty()) {
                cfg.query_path = bench_queries;
                cfg.query_format = parse_format(bench_qformat);
            }
            if (n_opt->count() || d_opt->count() || dist_opt->count()) {
                SyntheticSpec spec = cfg.synthetic.value_or(SyntheticSpec{});
                if (n_opt->count()) spec.n = bench_n;
                if (d_opt->count()) spec.dim = bench_d;
                if (dist_opt->count() || !cfg.synthetic) parse_distribution(bench_dist, spec);
                cfg.synthetic = spec;
            }
            if (cfg.synthetic) cfg.synthetic->seed = cfg.seed;
            if (k_opt->count()) cfg.k = bench_k;
            if (sample_opt->count()) cfg.query_sample = bench_sample;
            if (budgets_opt->count()) cfg.budgets = bench_budgets;
            if (cache_opt->count()) cfg.truth_cache = bench_cache;

            const ExperimentReport report = [&] {
                try {
                    return run_experiment(cfg);
                } catch (const Error& e) {
                    // Unreadable data files surface from inside the run.
                    if (e.kind() == ErrorKind::InvalidArgument && !cfg.data_path.empty() &&
                        !std::filesystem::exists(cfg.data_path)) {
                        throw Error(ErrorKind::Io, e.what());
                    }
                    throw;
                }
            }();
            write_text(bench_out + ".csv", curve_csv(report.curve));
            write_text(bench_out + ".json", curve_json(report.curve));
            write_text(bench_out + ".diag.json", diagnostics_json(report));
            const StageTimes& t = report.curve.times;
            err << "load " << t.load_seconds << "s, truth " << t.truth_seconds << "s, build " << t.build_seconds
                << "s, query " << t.query_seconds << "s\n";
            out << curve_csv(report.curve);
        } else if (*compare) {
            std::vector<RecallCurve> curves;
            for (const auto& path : compare_inputs) curves.push_back(parse_curve_json(read_text(path)));
            out << comparison_text(compare_runs(curves, compare_targets));
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::InvalidArgument: return kConfigError;
            case ErrorKind::Io: return kIoError;
            case ErrorKind::Invariant: return kInvariantError;
        }
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInvariantError;
    }
    return kOk;
}

}  // namespace rangelsh::cli
