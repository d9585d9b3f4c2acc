#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "frictionlab/errors.hpp"

namespace frictionlab {

// Shortest exact decimal form of a double; %.17g round-trips bit-exactly,
// which is what the byte-identical-output contract relies on.
inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string fmt_u64(std::uint64_t x) { return std::to_string(x); }

// Comma-delimited writer. Every file starts with a '#' metadata comment
// (artifact version + seed) followed by the mandatory header row.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& metadata_comment,
              const std::vector<std::string>& header)
        : out_(path, std::ios::binary), path_(path) {
        if (!out_) throw IoError("cannot open CSV for writing", path);
        out_ << "# " << metadata_comment << "\n";
        write_row(header);
    }

    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) throw IoError("write failed", path_);
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("close failed", path_);
    }

private:
    std::ofstream out_;
    std::string path_;
};

// In-memory CSV with named column access; '#' comment lines are skipped.
class CsvTable {
public:
    static CsvTable read_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open CSV for reading", path);
        CsvTable t;
        std::string line;
        bool have_header = false;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            std::vector<std::string> cells = split(line);
            if (!have_header) {
                for (std::size_t i = 0; i < cells.size(); ++i) t.columns_[cells[i]] = i;
                t.header_ = std::move(cells);
                have_header = true;
            } else {
                if (cells.size() != t.header_.size())
                    throw SchemaError(path + ": row width does not match header");
                t.rows_.push_back(std::move(cells));
            }
        }
        if (!have_header) throw SchemaError(path + ": missing header row");
        return t;
    }

    std::size_t row_count() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }

    bool has_column(const std::string& name) const { return columns_.count(name) > 0; }

    std::size_t column(const std::string& name) const {
        auto it = columns_.find(name);
        if (it == columns_.end()) throw SchemaError("missing CSV column '" + name + "'");
        return it->second;
    }

    const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }

    double cell_double(std::size_t row, std::size_t col) const {
        try {
            return std::stod(rows_[row][col]);
        } catch (const std::exception&) {
            throw SchemaError("non-numeric CSV cell: " + rows_[row][col]);
        }
    }

private:
    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream in(line);
        while (std::getline(in, cur, ',')) out.push_back(cur);
        if (!line.empty() && line.back() == ',') out.push_back("");
        return out;
    }

    std::vector<std::string> header_;
    std::map<std::string, std::size_t> columns_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace frictionlab
