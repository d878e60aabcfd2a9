#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace parapc {

/// Raised for malformed or unusable input data. Carries the offending
/// 1-based data row (0 when not row-specific) and column name when known.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t row = 0, std::string column = {})
        : std::runtime_error(what), row_(row), column_(std::move(column)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

/// Samples x variables numeric matrix, stored column-major so that each
/// variable is a contiguous span.
class Dataset {
public:
    Dataset() = default;

    /// Builds a dataset from column-major values. Validates the invariants
    /// (unique non-empty names, finite cells, n >= 2, p >= 2).
    Dataset(std::vector<std::string> names, std::size_t n, std::vector<double> column_major);

    std::size_t n() const noexcept { return n_; }
    std::size_t p() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    std::span<const double> column(std::size_t j) const {
        return {values_.data() + j * n_, n_};
    }
    double at(std::size_t row, std::size_t col) const { return values_[col * n_ + row]; }

    /// Index of a variable by name; throws DataError when unknown.
    std::size_t index_of(const std::string& name) const;

    /// New dataset with columns reordered so that column k is this
    /// dataset's column order[k].
    Dataset permuted(std::span<const std::size_t> order) const;

    /// Column-wise z-score (zero mean, unit sample variance).
    Dataset standardized() const;

private:
    std::vector<std::string> names_;
    std::size_t n_ = 0;
    std::vector<double> values_;
};

/// Dense symmetric p x p matrix with an associated sample count.
/// Immutable after construction.
class CorrelationMatrix {
public:
    CorrelationMatrix(std::size_t p, std::size_t n, std::vector<double> row_major);

    std::size_t p() const noexcept { return p_; }
    std::size_t n() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return r_[i * p_ + j]; }
    std::span<const double> data() const noexcept { return r_; }

private:
    std::size_t p_;
    std::size_t n_;
    std::vector<double> r_;
};

struct CsvOptions {
    char delimiter = ',';
    bool has_header = true;
};

Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Parses delimited text already held in memory. `source` names the input in
/// error messages.
Dataset parse_dataset(const std::string& text, const CsvOptions& opts = {},
                      const std::string& source = "<memory>");

void write_dataset(const std::filesystem::path& path, const Dataset& d, char delimiter = ',');

/// Pearson correlations of every column pair. Throws DataError naming the
/// first zero-variance column.
CorrelationMatrix correlations(const Dataset& d);

/// Sample covariance matrix (divisor n - 1), row-major p x p.
std::vector<double> covariances(const Dataset& d);

} // namespace parapc
