#pragma once

#include "inslab/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace inslab {

// Shortest-exact float formatting used for every emitted CSV value
// (17 significant digits; round-trips any double).
std::string format_double(double x);

// Dataset wire format: header `s0..s{n-1},a,sp0..sp{n-1},r,done`,
// one record per line.
void write_dataset_csv(std::ostream& os, const Dataset& ds);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset_csv(std::istream& is, Dataset::Provenance provenance);
Dataset read_dataset_csv(const std::filesystem::path& path, Dataset::Provenance provenance);

// Minimal row-oriented CSV emitter for experiment outputs.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<std::string>& cells);
    void add_row(const std::vector<double>& values);

    void save(const std::filesystem::path& path) const;
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace inslab
