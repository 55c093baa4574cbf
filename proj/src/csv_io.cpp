#include "ibnr/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ibnr/errors.hpp"

namespace ibnr {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

const std::vector<std::string> claim_fixed = {"claim_id", "policy_id", "accident_time",
                                              "report_delay", "severity"};
const std::vector<std::string> policy_fixed = {"policy_id", "exposure", "contract_start",
                                               "contract_end"};

std::vector<std::string> covariate_columns(const CsvTable& table,
                                           const std::vector<std::string>& fixed,
                                           const char* what) {
  if (table.header.size() < fixed.size())
    throw SchemaError(std::string(what) + " CSV header is missing required columns");
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    if (table.header[k] != fixed[k])
      throw SchemaError(std::string(what) + " CSV column " + std::to_string(k + 1) + " must be '" +
                        fixed[k] + "', found '" + table.header[k] + "'");
  }
  return {table.header.begin() + static_cast<std::ptrdiff_t>(fixed.size()), table.header.end()};
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("CSV input is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  table.header = split_line(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size())
      throw SchemaError("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in);
}

double parse_real(const std::string& cell, const std::string& context) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw SchemaError("cannot parse '" + cell + "' as a number (" + context + ")");
  return value;
}

std::vector<double> take_column(CsvTable& table, const std::string& name) {
  auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) throw SchemaError("missing column '" + name + "'");
  const auto k = static_cast<std::size_t>(it - table.header.begin());
  table.header.erase(it);
  std::vector<double> values;
  values.reserve(table.rows.size());
  for (auto& row : table.rows) {
    values.push_back(parse_real(row[k], name));
    row.erase(row.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return values;
}

Portfolio read_portfolio(std::istream& claims_csv, std::istream& policies_csv) {
  return read_portfolio(read_csv(claims_csv), read_csv(policies_csv));
}

Portfolio read_portfolio(const CsvTable& claims_table, const CsvTable& policy_table) {
  auto schema = covariate_columns(claims_table, claim_fixed, "claims");
  auto policy_schema = covariate_columns(policy_table, policy_fixed, "policies");
  if (schema != policy_schema)
    throw SchemaError("claims and policies CSV covariate columns differ");

  std::vector<PolicyRecord> policies;
  policies.reserve(policy_table.rows.size());
  for (const auto& row : policy_table.rows) {
    PolicyRecord p;
    p.policy_id = row[0];
    p.exposure = parse_real(row[1], "exposure");
    p.contract_start = parse_real(row[2], "contract_start");
    p.contract_end = parse_real(row[3], "contract_end");
    for (std::size_t k = 4; k < row.size(); ++k) p.covariates.push_back(parse_real(row[k], policy_table.header[k]));
    policies.push_back(std::move(p));
  }
  std::vector<Claim> claims;
  claims.reserve(claims_table.rows.size());
  for (const auto& row : claims_table.rows) {
    Claim c;
    c.claim_id = row[0];
    c.policy_id = row[1];
    c.accident_time = parse_real(row[2], "accident_time");
    c.report_delay = parse_real(row[3], "report_delay");
    c.severity = parse_real(row[4], "severity");
    for (std::size_t k = 5; k < row.size(); ++k) c.covariates.push_back(parse_real(row[k], claims_table.header[k]));
    claims.push_back(std::move(c));
  }
  return Portfolio::make(std::move(policies), std::move(claims), std::move(schema));
}

Portfolio read_portfolio_files(const std::filesystem::path& claims_path,
                               const std::filesystem::path& policies_path) {
  std::ifstream claims(claims_path);
  if (!claims) throw IoError("cannot open " + claims_path.string());
  std::ifstream policies(policies_path);
  if (!policies) throw IoError("cannot open " + policies_path.string());
  return read_portfolio(claims, policies);
}

void write_claims_csv(std::ostream& out, const Portfolio& portfolio) {
  out << "claim_id,policy_id,accident_time,report_delay,severity";
  for (const auto& name : portfolio.covariate_schema()) out << ',' << name;
  out << '\n';
  for (const auto& c : portfolio.claims()) {
    out << c.claim_id << ',' << c.policy_id << ',' << format_real(c.accident_time) << ','
        << format_real(c.report_delay) << ',' << format_real(c.severity);
    for (double x : c.covariates) out << ',' << format_real(x);
    out << '\n';
  }
}

void write_policies_csv(std::ostream& out, const Portfolio& portfolio) {
  out << "policy_id,exposure,contract_start,contract_end";
  for (const auto& name : portfolio.covariate_schema()) out << ',' << name;
  out << '\n';
  for (const auto& p : portfolio.policies()) {
    out << p.policy_id << ',' << format_real(p.exposure) << ',' << format_real(p.contract_start) << ','
        << format_real(p.contract_end);
    for (double x : p.covariates) out << ',' << format_real(x);
    out << '\n';
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace ibnr
