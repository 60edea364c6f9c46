#include "rangelsh/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "rangelsh/error.hpp"

namespace rangelsh {

FileFormat parse_format(std::string_view name) {
    if (name == "fvecs") return FileFormat::Fvecs;
    if (name == "csv") return FileFormat::Csv;
    if (name == "raw-f32") return FileFormat::RawF32;
    fail("unknown file format '" + std::string(name) + "' (expected fvecs, csv or raw-f32)");
}

std::string_view format_name(FileFormat format) {
    switch (format) {
        case FileFormat::Fvecs: return "fvecs";
        case FileFormat::Csv: return "csv";
        case FileFormat::RawF32: return "raw-f32";
    }
    return "?";
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

DatasetView::DatasetView(std::vector<double> values, std::size_t dim) : values_(std::move(values)), dim_(dim) {
    if (dim_ == 0) fail("vector dimension must be at least 1");
    if (values_.size() % dim_ != 0) fail("value count is not a multiple of the dimension");
    const std::size_t n = values_.size() / dim_;
    norms_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = (*this)[i];
        for (double v : row) {
            if (!std::isfinite(v)) fail("non-finite component in record " + std::to_string(i));
        }
        norms_[i] = l2_norm(row);
        max_norm_ = std::max(max_norm_, norms_[i]);
    }
}

DatasetView DatasetView::from_rows(const std::vector<Vector>& rows) {
    if (rows.empty()) fail("empty dataset");
    const std::size_t dim = rows.front().size();
    std::vector<double> flat;
    flat.reserve(rows.size() * dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != dim) {
            fail("dimension mismatch at record " + std::to_string(i) + ": expected " + std::to_string(dim) +
                 ", got " + std::to_string(rows[i].size()));
        }
        flat.insert(flat.end(), rows[i].begin(), rows[i].end());
    }
    return DatasetView(std::move(flat), dim);
}

std::uint64_t DatasetView::fingerprint() const {
    Fnv1a h;
    h.add_u64(size());
    h.add_u64(dim_);
    for (double v : values_) h.add_u64(std::bit_cast<std::uint64_t>(v));
    return h.value();
}

namespace {

DatasetView load_fvecs(std::istream& in) {
    std::vector<double> flat;
    std::size_t dim = 0;
    for (std::size_t record = 0;; ++record) {
        std::int32_t d = 0;
        if (!read_le_if_available(in, d)) break;
        if (d <= 0) fail("fvecs record " + std::to_string(record) + " declares dimension " + std::to_string(d));
        if (record == 0) {
            dim = static_cast<std::size_t>(d);
        } else if (static_cast<std::size_t>(d) != dim) {
            fail("dimension mismatch at record " + std::to_string(record) + ": expected " + std::to_string(dim) +
                 ", got " + std::to_string(d));
        }
        for (std::int32_t j = 0; j < d; ++j) {
            float v = read_le<float>(in, "fvecs record " + std::to_string(record));
            if (!std::isfinite(v)) fail("non-finite component in record " + std::to_string(record));
            flat.push_back(v);
        }
    }
    if (flat.empty()) fail("empty dataset");
    return DatasetView(std::move(flat), dim);
}

DatasetView load_raw(std::istream& in) {
    auto n = read_le<std::int32_t>(in, "raw-f32 header");
    auto d = read_le<std::int32_t>(in, "raw-f32 header");
    if (n < 0 || d <= 0) fail("raw-f32 header declares n=" + std::to_string(n) + ", d=" + std::to_string(d));
    if (n == 0) fail("empty dataset");
    std::vector<double> flat(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < flat.size(); ++i) {
        float v = read_le<float>(in, "raw-f32 record " + std::to_string(i / d));
        if (!std::isfinite(v)) fail("non-finite component in record " + std::to_string(i / d));
        flat[i] = v;
    }
    return DatasetView(std::move(flat), static_cast<std::size_t>(d));
}

DatasetView load_csv(std::istream& in) {
    std::vector<double> flat;
    std::size_t dim = 0;
    std::size_t row = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::size_t count = 0;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                fail("unparsable value '" + cell + "' in row " + std::to_string(row));
            }
            if (cell.find_first_not_of(" \t", used) != std::string::npos) {
                fail("unparsable value '" + cell + "' in row " + std::to_string(row));
            }
            if (!std::isfinite(v)) fail("non-finite component in record " + std::to_string(row));
            flat.push_back(v);
            ++count;
        }
        if (row == 0) {
            dim = count;
        } else if (count != dim) {
            fail("dimension mismatch at row " + std::to_string(row) + ": expected " + std::to_string(dim) +
                 ", got " + std::to_string(count));
        }
        ++row;
    }
    if (flat.empty()) fail("empty dataset");
    return DatasetView(std::move(flat), dim);
}

}  // namespace

DatasetView load_dataset(const std::filesystem::path& path, FileFormat format) {
    std::ifstream in(path, format == FileFormat::Csv ? std::ios::in : std::ios::binary);
    if (!in) fail_io("cannot open " + path.string());
    switch (format) {
        case FileFormat::Fvecs: return load_fvecs(in);
        case FileFormat::RawF32: return load_raw(in);
        case FileFormat::Csv: return load_csv(in);
    }
    fail("unknown file format");
}

void save_dataset(const DatasetView& ds, const std::filesystem::path& path, FileFormat format) {
    std::ofstream out(path, format == FileFormat::Csv ? std::ios::out : std::ios::binary);
    if (!out) fail_io("cannot open " + path.string() + " for writing");
    const auto d = static_cast<std::int32_t>(ds.dim());
    switch (format) {
        case FileFormat::Fvecs:
            for (std::size_t i = 0; i < ds.size(); ++i) {
                write_le(out, d);
                for (double v : ds[i]) write_le(out, static_cast<float>(v));
            }
            break;
        case FileFormat::RawF32:
            write_le(out, static_cast<std::int32_t>(ds.size()));
            write_le(out, d);
            for (double v : ds.values()) write_le(out, static_cast<float>(v));
            break;
        case FileFormat::Csv: {
            char buf[64];
            for (std::size_t i = 0; i < ds.size(); ++i) {
                auto row = ds[i];
                for (std::size_t j = 0; j < row.size(); ++j) {
                    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(row[j])));
                    if (j) out << ',';
                    out << buf;
                }
                out << '\n';
            }
            break;
        }
    }
    if (!out) fail_io("write failed for " + path.string());
}

DatasetView normalize_queries(const DatasetView& queries) {
    std::vector<double> flat(queries.values().begin(), queries.values().end());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const double norm = queries.norm(i);
        if (norm <= 0.0) fail("zero-norm query at index " + std::to_string(i));
        for (std::size_t j = 0; j < queries.dim(); ++j) flat[i * queries.dim() + j] /= norm;
    }
    return DatasetView(std::move(flat), queries.dim());
}

double nearest_rank(std::span<const double> sorted, double fraction) {
    if (sorted.empty()) fail("empty dataset");
    if (!(fraction >= 0.0 && fraction <= 1.0)) fail("percentile fraction outside [0, 1]");
    auto rank = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(sorted.size())));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

NormStats norm_stats(const DatasetView& ds, std::span<const double> percentile_grid, std::size_t histogram_bins) {
    if (ds.empty()) fail("empty dataset");
    if (histogram_bins == 0) fail("histogram needs at least one bin");
    std::vector<double> sorted(ds.norms().begin(), ds.norms().end());
    std::sort(sorted.begin(), sorted.end());

    NormStats stats;
    stats.max_norm = sorted.back();
    stats.median_norm = nearest_rank(sorted, 0.5);
    for (double f : percentile_grid) stats.percentiles.emplace_back(f, nearest_rank(sorted, f));

    stats.histogram.assign(histogram_bins, 0);
    for (double v : sorted) {
        std::size_t bin = 0;
        if (stats.max_norm > 0.0) {
            bin = static_cast<std::size_t>(v / stats.max_norm * static_cast<double>(histogram_bins));
            bin = std::min(bin, histogram_bins - 1);
        }
        ++stats.histogram[bin];
    }
    return stats;
}

}  // namespace rangelsh
