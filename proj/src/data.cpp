#include "parapc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

namespace parapc {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    if (delim == ' ' || delim == '\t') {
        // whitespace delimiters collapse runs, so aligned columns parse
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            if (i >= line.size()) break;
            auto j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
            out.push_back(line.substr(i, j - i));
            i = j;
        }
        return out;
    }
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto pos = text.find('\n', start);
        auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

void validate(const std::vector<std::string>& names, std::size_t n, const std::vector<double>& values) {
    const auto p = names.size();
    if (p < 2) throw DataError("dataset needs at least 2 variables, got " + std::to_string(p));
    if (n < 2) throw DataError("dataset needs at least 2 samples, got " + std::to_string(n));
    if (values.size() != n * p) throw DataError("value count does not match n * p");
    std::unordered_set<std::string> seen;
    for (const auto& name : names) {
        if (name.empty()) throw DataError("empty variable name");
        if (!seen.insert(name).second) throw DataError("duplicate variable name \"" + name + "\"", 0, name);
    }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < n; ++i)
            if (!std::isfinite(values[j * n + i]))
                throw DataError("non-finite value at row " + std::to_string(i + 1) + ", column \"" +
                                    names[j] + "\"",
                                i + 1, names[j]);
}

} // namespace

Dataset::Dataset(std::vector<std::string> names, std::size_t n, std::vector<double> column_major)
    : names_(std::move(names)), n_(n), values_(std::move(column_major)) {
    validate(names_, n_, values_);
}

std::size_t Dataset::index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw DataError("unknown variable \"" + name + "\"", 0, name);
    return static_cast<std::size_t>(it - names_.begin());
}

Dataset Dataset::permuted(std::span<const std::size_t> order) const {
    if (order.size() != p()) throw DataError("permutation length does not match variable count");
    std::vector<std::string> names;
    std::vector<double> values;
    values.reserve(values_.size());
    for (auto j : order) {
        if (j >= p()) throw DataError("permutation index out of range");
        names.push_back(names_[j]);
        auto col = column(j);
        values.insert(values.end(), col.begin(), col.end());
    }
    return Dataset(std::move(names), n_, std::move(values));
}

Dataset Dataset::standardized() const {
    std::vector<double> values(values_.size());
    for (std::size_t j = 0; j < p(); ++j) {
        auto col = column(j);
        double mean = 0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(n_);
        double ss = 0;
        for (double v : col) ss += (v - mean) * (v - mean);
        double sd = std::sqrt(ss / static_cast<double>(n_ - 1));
        if (sd == 0) throw DataError("column \"" + names_[j] + "\" has zero variance", 0, names_[j]);
        for (std::size_t i = 0; i < n_; ++i) values[j * n_ + i] = (col[i] - mean) / sd;
    }
    return Dataset(names_, n_, std::move(values));
}

CorrelationMatrix::CorrelationMatrix(std::size_t p, std::size_t n, std::vector<double> row_major)
    : p_(p), n_(n), r_(std::move(row_major)) {
    if (r_.size() != p_ * p_) throw DataError("correlation matrix size does not match p * p");
}

Dataset parse_dataset(const std::string& text, const CsvOptions& opts, const std::string& source) {
    auto lines = split_lines(text);
    std::size_t first = 0;
    std::vector<std::string> names;
    if (opts.has_header) {
        if (lines.empty()) throw DataError(source + ": missing header row");
        for (auto f : split(lines[0], opts.delimiter)) names.emplace_back(f);
        first = 1;
    }

    std::vector<std::vector<double>> cols;
    std::size_t n = 0;
    for (std::size_t li = first; li < lines.size(); ++li) {
        auto fields = split(lines[li], opts.delimiter);
        if (fields.size() == 1 && fields[0].empty()) continue;
        const std::size_t row = n + 1;
        if (names.empty()) {
            for (std::size_t j = 0; j < fields.size(); ++j) names.push_back("V" + std::to_string(j + 1));
        }
        if (cols.empty()) cols.resize(names.size());
        if (fields.size() != names.size())
            throw DataError(source + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                                " fields, expected " + std::to_string(names.size()),
                            row);
        for (std::size_t j = 0; j < fields.size(); ++j) {
            auto f = fields[j];
            double v = 0;
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
                throw DataError(source + ": non-numeric value '" + std::string(f) + "' at row " +
                                    std::to_string(row) + ", column \"" + names[j] + "\"",
                                row, names[j]);
            if (!std::isfinite(v))
                throw DataError(source + ": non-finite value '" + std::string(f) + "' at row " +
                                    std::to_string(row) + ", column \"" + names[j] + "\"",
                                row, names[j]);
            cols[j].push_back(v);
        }
        ++n;
    }

    std::vector<double> values;
    values.reserve(n * names.size());
    for (auto& c : cols) values.insert(values.end(), c.begin(), c.end());
    try {
        return Dataset(std::move(names), n, std::move(values));
    } catch (const DataError& e) {
        throw DataError(source + ": " + e.what(), e.row(), e.column());
    }
}

Dataset load_dataset(const std::filesystem::path& path, const CsvOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw DataError("read failure on " + path.string());
    return parse_dataset(buf.str(), opts, path.string());
}

void write_dataset(const std::filesystem::path& path, const Dataset& d, char delimiter) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (std::size_t j = 0; j < d.p(); ++j) out << (j ? std::string(1, delimiter) : "") << d.names()[j];
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (std::size_t j = 0; j < d.p(); ++j) {
            if (j) out << delimiter;
            out << d.at(i, j);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failure on " + path.string());
}

namespace {

std::vector<double> centered(const Dataset& d, bool require_variance) {
    const auto n = d.n(), p = d.p();
    std::vector<double> c(n * p);
    for (std::size_t j = 0; j < p; ++j) {
        auto col = d.column(j);
        auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        if (require_variance && *lo == *hi)
            throw DataError("column \"" + d.names()[j] + "\" has zero variance", 0, d.names()[j]);
        double mean = 0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) c[j * n + i] = col[i] - mean;
    }
    return c;
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

} // namespace

CorrelationMatrix correlations(const Dataset& d) {
    const auto n = d.n(), p = d.p();
    auto c = centered(d, true);
    std::vector<double> norm(p);
    for (std::size_t j = 0; j < p; ++j) norm[j] = std::sqrt(dot(&c[j * n], &c[j * n], n));
    std::vector<double> r(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        r[i * p + i] = 1.0;
        for (std::size_t j = i + 1; j < p; ++j) {
            double v = dot(&c[i * n], &c[j * n], n) / (norm[i] * norm[j]);
            v = std::clamp(v, -1.0, 1.0);
            r[i * p + j] = v;
            r[j * p + i] = v;
        }
    }
    return CorrelationMatrix(p, n, std::move(r));
}

std::vector<double> covariances(const Dataset& d) {
    const auto n = d.n(), p = d.p();
    auto c = centered(d, false);
    std::vector<double> s(p * p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) {
            double v = dot(&c[i * n], &c[j * n], n) / static_cast<double>(n - 1);
            s[i * p + j] = v;
            s[j * p + i] = v;
        }
    return s;
}

} // namespace parapc
