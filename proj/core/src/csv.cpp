#include "mlkm/csv.hpp"

#include "mlkm/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mlkm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  CsvTable table;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (!have_header) {
      for (auto c : cells) table.header.push_back(unquote(c));
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size()) {
      fail(Errc::ParseError, source + ": line " + std::to_string(line_no) + " has " +
                                 std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(table.header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = cells[c];
      const char* end = cell.data() + cell.size();
      const char* begin = cell.data();
      if (!cell.empty() && *begin == '+') ++begin;
      const auto res = std::from_chars(begin, end, row[c]);
      if (cell.empty() || res.ec != std::errc{} || res.ptr != end || !std::isfinite(row[c])) {
        fail(Errc::ParseError, source + ": line " + std::to_string(line_no) + ", column " +
                                   std::to_string(c + 1) + " ('" + table.header[c] +
                                   "'): not a finite number: '" + std::string(cell) + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) fail(Errc::ParseError, source + ": missing header row");
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::ParseError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

std::vector<std::string> Bounds::constant_columns() const {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!(upper(j) > lower(j))) {
      out.push_back(static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                               : std::to_string(j));
    }
  }
  return out;
}

Bounds fit_bounds(const Eigen::MatrixXd& x, std::vector<std::string> names) {
  if (x.rows() < 1) fail(Errc::TooFewSamples, "cannot fit bounds on an empty matrix");
  if (!names.empty() && names.size() != static_cast<std::size_t>(x.cols())) {
    fail(Errc::DimMismatch, "bound names do not match the column count");
  }
  Bounds b;
  b.names = std::move(names);
  b.lower = x.colwise().minCoeff().transpose();
  b.upper = x.colwise().maxCoeff().transpose();
  return b;
}

Eigen::MatrixXd apply_bounds(const Bounds& bounds, const Eigen::MatrixXd& x) {
  if (x.cols() != bounds.lower.size()) {
    fail(Errc::DimMismatch, "matrix has " + std::to_string(x.cols()) + " columns, bounds have " +
                                std::to_string(bounds.lower.size()));
  }
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double lo = bounds.lower(j);
    const double span = bounds.upper(j) - lo;
    if (span > 0.0) {
      out.col(j) = (x.col(j).array() - lo) / span;
    } else {
      out.col(j).setConstant(0.5);
    }
  }
  return out;
}

nlohmann::json to_json(const Bounds& bounds) {
  return {{"names", bounds.names},
          {"lower", std::vector<double>(bounds.lower.data(),
                                        bounds.lower.data() + bounds.lower.size())},
          {"upper", std::vector<double>(bounds.upper.data(),
                                        bounds.upper.data() + bounds.upper.size())},
          {"constant_columns", bounds.constant_columns()}};
}

Bounds bounds_from_json(const nlohmann::json& j) {
  try {
    Bounds b;
    b.names = j.value("names", std::vector<std::string>{});
    const auto lo = j.at("lower").get<std::vector<double>>();
    const auto hi = j.at("upper").get<std::vector<double>>();
    if (lo.size() != hi.size() || (!b.names.empty() && b.names.size() != lo.size())) {
      fail(Errc::ParseError, "bounds arrays have inconsistent lengths");
    }
    b.lower = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    b.upper = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    return b;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, std::string("bounds record: ") + e.what());
  }
}

Dataset table_to_dataset(const CsvTable& table, const std::string& target_column) {
  if (table.header.size() < 2) {
    fail(Errc::ParseError, "need at least one covariate column and a target column");
  }
  std::size_t target = table.header.size() - 1;
  if (!target_column.empty()) {
    const auto it = std::find(table.header.begin(), table.header.end(), target_column);
    if (it == table.header.end()) {
      fail(Errc::ParseError, "target column '" + target_column + "' not in header");
    }
    target = static_cast<std::size_t>(it - table.header.begin());
  }
  Dataset data;
  const auto n = table.values.rows();
  const auto cols = static_cast<Eigen::Index>(table.header.size());
  data.x.resize(n, cols - 1);
  std::vector<std::string> names;
  Eigen::Index k = 0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    if (static_cast<std::size_t>(c) == target) continue;
    data.x.col(k++) = table.values.col(c);
    names.push_back(table.header[static_cast<std::size_t>(c)]);
  }
  data.y = table.values.col(static_cast<Eigen::Index>(target));
  data.provenance = {{"target", table.header[target]}, {"covariates", names}};
  return data;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 bool normalize) {
  const CsvTable table = read_csv(path);
  Dataset data = table_to_dataset(table, target_column);
  if (data.size() < 1) fail(Errc::ParseError, "'" + path.string() + "' has no data rows");
  data.provenance["source"] = path.string();
  if (normalize) {
    const Bounds b = fit_bounds(data.x, data.provenance["covariates"].get<std::vector<std::string>>());
    data.x = apply_bounds(b, data.x);
    data.provenance["bounds"] = to_json(b);
  }
  return data;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
  if (header.size() != static_cast<std::size_t>(values.cols())) {
    fail(Errc::DimMismatch, "header does not match the column count");
  }
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      os << (c ? "," : "") << format_double(values(r, c));
    }
    os << '\n';
  }
}

}  // namespace mlkm
