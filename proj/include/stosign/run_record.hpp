#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stosign {

/// Formats a double so it round-trips bit-exactly (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

/// Per-step log of one run: a fixed column schema, one row per step, and an
/// ordered summary block. Sparse cells (values only emitted at block
/// boundaries, say) are held as NaN internally and written as empty fields;
/// every dense field must be finite.
class RunRecord {
public:
    static constexpr double sparse = std::numeric_limits<double>::quiet_NaN();

    RunRecord() = default;
    explicit RunRecord(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t row_count() const { return rows_.size(); }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

    void add_row(std::vector<double> values) {
        if (values.size() != columns_.size()) {
            throw std::invalid_argument("RunRecord::add_row: width mismatch");
        }
        for (double v : values) {
            if (std::isinf(v)) throw std::invalid_argument("RunRecord::add_row: infinite value");
        }
        rows_.push_back(std::move(values));
    }

    double cell(std::size_t row, const std::string& column) const {
        return rows_.at(row).at(column_index(column));
    }

    std::size_t column_index(const std::string& column) const {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (columns_[i] == column) return i;
        }
        throw std::invalid_argument("RunRecord: unknown column " + column);
    }

    void set_summary(const std::string& key, double value) {
        if (!std::isfinite(value)) {
            throw std::invalid_argument("RunRecord::set_summary: non-finite value for " + key);
        }
        for (auto& [k, v] : summary_) {
            if (k == key) { v = value; return; }
        }
        summary_.emplace_back(key, value);
    }

    const std::vector<std::pair<std::string, double>>& summary() const { return summary_; }

    double summary_value(const std::string& key) const {
        for (const auto& [k, v] : summary_) {
            if (k == key) return v;
        }
        throw std::invalid_argument("RunRecord: unknown summary key " + key);
    }

    /// Writes `# summary <key> = <value>` lines, then the header, then rows.
    void write_csv(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("RunRecord: cannot open " + path.string());
        out << to_csv();
    }

    std::string to_csv() const {
        std::ostringstream out;
        for (const auto& [k, v] : summary_) {
            out << "# summary " << k << " = " << format_double(v) << "\n";
        }
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            out << (i ? "," : "") << columns_[i];
        }
        out << "\n";
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ",";
                if (!std::isnan(row[i])) out << format_double(row[i]);
            }
            out << "\n";
        }
        return out.str();
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::pair<std::string, double>> summary_;
};

/// Reads back a RunRecord CSV (summary comments included). Used by the
/// aggregate cross-checks.
inline RunRecord read_record_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_record_csv: cannot open " + path.string());
    std::string line;
    std::vector<std::pair<std::string, double>> summary;
    std::vector<std::string> columns;
    RunRecord record;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# summary ", 0) == 0) {
            const std::string rest = line.substr(10);
            const auto eq = rest.find(" = ");
            if (eq == std::string::npos) throw std::runtime_error("read_record_csv: bad summary line");
            summary.emplace_back(rest.substr(0, eq), std::stod(rest.substr(eq + 3)));
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (!have_header) {
            columns = fields;
            record = RunRecord(columns);
            for (const auto& [k, v] : summary) record.set_summary(k, v);
            have_header = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            row.push_back(f.empty() ? RunRecord::sparse : std::stod(f));
        }
        while (row.size() < columns.size()) row.push_back(RunRecord::sparse);
        record.add_row(std::move(row));
    }
    return record;
}

} // namespace stosign
