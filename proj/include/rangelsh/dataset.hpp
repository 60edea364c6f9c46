#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rangelsh {

using Vector = std::vector<double>;

enum class FileFormat { Fvecs, Csv, RawF32 };

FileFormat parse_format(std::string_view name);
std::string_view format_name(FileFormat format);

/// Immutable row-major set of d-dimensional vectors with cached 2-norms.
///
/// Values are held in double precision. The on-disk formats are 32-bit, and a
/// float widened to double narrows back exactly, so file round trips are
/// lossless.
class DatasetView {
public:
    DatasetView() = default;

    /// Takes ownership of `values` (n * dim entries). Rejects non-finite values
    /// and a size that is not a multiple of `dim`.
    DatasetView(std::vector<double> values, std::size_t dim);

    static DatasetView from_rows(const std::vector<Vector>& rows);

    std::size_t size() const noexcept { return norms_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return norms_.empty(); }

    std::span<const double> operator[](std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }

    double norm(std::size_t i) const { return norms_[i]; }
    std::span<const double> norms() const noexcept { return norms_; }
    double max_norm() const noexcept { return max_norm_; }
    std::span<const double> values() const noexcept { return values_; }

    /// 64-bit FNV-1a over (n, d, raw value bytes).
    std::uint64_t fingerprint() const;

private:
    std::vector<double> values_;
    std::vector<double> norms_;
    std::size_t dim_ = 0;
    double max_norm_ = 0.0;
};

struct NormStats {
    /// Equal-width histogram over [0, maxNorm].
    std::vector<std::size_t> histogram;
    /// (fraction, norm) pairs in grid order.
    std::vector<std::pair<double, double>> percentiles;
    double max_norm = 0.0;
    double median_norm = 0.0;
};

DatasetView load_dataset(const std::filesystem::path& path, FileFormat format);
void save_dataset(const DatasetView& ds, const std::filesystem::path& path, FileFormat format);

/// Rescales every query to unit 2-norm. Zero-norm queries are rejected.
DatasetView normalize_queries(const DatasetView& queries);

/// Nearest-rank percentile of an ascending sequence: the element at rank
/// max(1, ceil(fraction * n)).
double nearest_rank(std::span<const double> sorted, double fraction);

NormStats norm_stats(const DatasetView& ds, std::span<const double> percentile_grid,
                     std::size_t histogram_bins = 20);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

}  // namespace rangelsh
