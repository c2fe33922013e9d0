#include "stdfm/sample.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "stdfm/error.hpp"

namespace stdfm {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

Sample::Sample(Eigen::MatrixXd data, std::vector<std::string> column_names)
    : data_(std::move(data)), names_(std::move(column_names)) {
  if (data_.cols() < 2) {
    throw DataError("sample needs at least 2 columns, got " + std::to_string(data_.cols()));
  }
  if (data_.rows() < data_.cols()) {
    throw DataError("sample needs n >= d, got n=" + std::to_string(data_.rows()) +
                    ", d=" + std::to_string(data_.cols()));
  }
  for (Eigen::Index j = 0; j < data_.cols(); ++j) {
    for (Eigen::Index i = 0; i < data_.rows(); ++i) {
      if (!std::isfinite(data_(i, j))) {
        throw DataError("non-finite value at row " + std::to_string(i + 1) + ", column " +
                        std::to_string(j + 1));
      }
    }
  }
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < data_.cols(); ++j) names_.push_back("x" + std::to_string(j + 1));
  }
  if (names_.size() != static_cast<std::size_t>(data_.cols())) {
    throw DataError("column name count does not match the data width");
  }
}

RankMatrix compute_ranks(const Sample& sample) {
  const int n = sample.n();
  const int d = sample.d();
  RankMatrix out;
  out.ranks.resize(n, d);
  std::vector<int> order(n);
  for (int j = 0; j < d; ++j) {
    auto col = sample.data().col(j);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return col(a) < col(b); });
    for (int r = 0; r < n; ++r) {
      out.ranks(order[r], j) = r + 1;
      if (r > 0 && col(order[r]) == col(order[r - 1])) ++out.tie_count;
    }
  }
  return out;
}

Sample parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> names;
  for (auto& f : split_fields(line)) names.push_back(trim(f));
  const std::size_t d = names.size();

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != d) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(d) +
                      " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      std::string f = trim(fields[j]);
      if (f.empty()) {
        throw DataError("line " + std::to_string(line_no) + ", column " +
                        std::to_string(j + 1) + ": missing value");
      }
      double v = 0.0;
      const char* first = f.data();
      const char* last = f.data() + f.size();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw DataError("line " + std::to_string(line_no) + ", column " +
                        std::to_string(j + 1) + ": not a number: '" + f + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  Eigen::MatrixXd data(rows, d);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < d; ++j) data(i, j) = values[i * d + j];
  return Sample(std::move(data), std::move(names));
}

Sample read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in);
}

void write_csv(std::ostream& out, const Sample& sample) {
  const auto& names = sample.column_names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  std::ostringstream row;
  row << std::setprecision(17);
  for (int i = 0; i < sample.n(); ++i) {
    row.str({});
    for (int j = 0; j < sample.d(); ++j) row << (j ? "," : "") << sample.data()(i, j);
    out << row.str() << '\n';
  }
}

}  // namespace stdfm
