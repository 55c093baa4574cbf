#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ibnr/claims.hpp"

namespace ibnr {

/// Formats a double with 17 significant digits ("%.17g").
std::string format_real(double value);

/// Minimal comma-separated table: a header row plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);
double parse_real(const std::string& cell, const std::string& context);

/// Claims: claim_id,policy_id,accident_time,report_delay,severity,<covariates...>
/// Policies: policy_id,exposure,contract_start,contract_end,<covariates...>
/// Both files must carry the same covariate columns in the same order.
Portfolio read_portfolio(std::istream& claims_csv, std::istream& policies_csv);
Portfolio read_portfolio(const CsvTable& claims, const CsvTable& policies);

/// Removes the named column from the table and returns its parsed values.
std::vector<double> take_column(CsvTable& table, const std::string& name);
Portfolio read_portfolio_files(const std::filesystem::path& claims_path,
                               const std::filesystem::path& policies_path);

void write_claims_csv(std::ostream& out, const Portfolio& portfolio);
void write_policies_csv(std::ostream& out, const Portfolio& portfolio);

/// Writes text to `path`, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ibnr
