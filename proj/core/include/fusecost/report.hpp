// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fusecost/engine.hpp"

namespace fusecost {

inline constexpr const char* kSweepSchema = "fusecost-sweep-v1";

struct CsvOptions {
  bool per_stack = false;  // add one row per stack after each total row
};

// Fixed leading columns, then rd_/wr_/en_<level>_<operand>_<cause> per cell.
std::vector<std::string> sweep_csv_header(const Accelerator& acc);

// Rows for one sweep entry. Failed rows carry the error text and empty numbers.
std::vector<std::vector<std::string>> sweep_csv_rows(const SweepRow& row, const Accelerator& acc,
                                                     const CsvOptions& opts = {});

std::string format_double(double v);
std::string csv_line(const std::vector<std::string>& fields);
// Splits one CSV record. Handles quoted fields with doubled quotes.
std::vector<std::string> parse_csv_line(const std::string& line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;  // throws ParseError when missing
};

CsvTable read_csv(std::istream& in);

// Existing lines grouped by strategy id, in file order. Throws ParseError on a
// header that does not match `expected_header`.
std::map<std::string, std::vector<std::string>> completed_rows(std::istream& in,
                                                               const std::vector<std::string>& expected_header);

// Writes header and rows in grid order; skipped rows are copied from `previous`.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const Accelerator& acc,
                     const std::map<std::string, std::vector<std::string>>& previous = {},
                     const CsvOptions& opts = {});

nlohmann::json to_json(const Breakdown& b, const Accelerator& acc);
nlohmann::json to_json(const CostResult& r, const Accelerator& acc);
nlohmann::json tile_types_json(const StackGeometry& geom, const std::vector<TileType>& types);

}  // namespace fusecost
