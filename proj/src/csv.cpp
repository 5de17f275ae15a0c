#include "inslab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace inslab {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_dataset_csv(std::ostream& os, const Dataset& ds) {
    const int n = ds.empty() ? 0 : ds.state_dim();
    for (int i = 0; i < n; ++i) os << 's' << i << ',';
    os << 'a';
    for (int i = 0; i < n; ++i) os << ",sp" << i;
    os << ",r,done\n";
    for (const auto& rec : ds.records()) {
        for (double v : rec.state) os << format_double(v) << ',';
        os << rec.action;
        for (double v : rec.next_state) os << ',' << format_double(v);
        os << ',' << format_double(rec.reward) << ',' << (rec.terminal ? 1 : 0) << '\n';
    }
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    write_dataset_csv(os, ds);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

Dataset read_dataset_csv(std::istream& is, Dataset::Provenance provenance) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("dataset CSV: missing header");
    const auto header = split_line(line);
    int n = 0;
    while (n < static_cast<int>(header.size()) && header[static_cast<std::size_t>(n)][0] == 's' &&
           header[static_cast<std::size_t>(n)].substr(0, 2) != "sp")
        ++n;
    if (header.size() != static_cast<std::size_t>(2 * n + 3))
        throw std::runtime_error("dataset CSV: malformed header");
    Dataset ds(provenance);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("dataset CSV: wrong cell count in row");
        TransitionRecord rec;
        std::size_t c = 0;
        for (int i = 0; i < n; ++i) rec.state.push_back(std::stod(cells[c++]));
        rec.action = std::stoi(cells[c++]);
        for (int i = 0; i < n; ++i) rec.next_state.push_back(std::stod(cells[c++]));
        rec.reward = std::stod(cells[c++]);
        rec.terminal = cells[c] == "1";
        ds.push(std::move(rec));
    }
    return ds;
}

Dataset read_dataset_csv(const std::filesystem::path& path, Dataset::Provenance provenance) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path.string());
    return read_dataset_csv(is, provenance);
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("CsvWriter: row width does not match header");
    rows_.push_back(cells);
}

void CsvWriter::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(cells);
}

std::string CsvWriter::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header_.size(); ++i)
        os << header_[i] << (i + 1 == header_.size() ? '\n' : ',');
    for (const auto& row : rows_)
        for (std::size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 == row.size() ? '\n' : ',');
    return os.str();
}

void CsvWriter::save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os << str();
}

}  // namespace inslab
