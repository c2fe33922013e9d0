#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace stdfm {

/// An n x d matrix of raw observations. Margins are never estimated; only ranks are used.
///
/// Construction validates n >= d >= 2 and that every entry is finite.
class Sample {
 public:
  explicit Sample(Eigen::MatrixXd data, std::vector<std::string> column_names = {});

  int n() const { return static_cast<int>(data_.rows()); }
  int d() const { return static_cast<int>(data_.cols()); }

  const Eigen::MatrixXd& data() const { return data_; }
  const std::vector<std::string>& column_names() const { return names_; }

 private:
  Eigen::MatrixXd data_;
  std::vector<std::string> names_;
};

/// Column-wise ranks in {1,...,n}. Ties are broken by row order.
struct RankMatrix {
  Eigen::MatrixXi ranks;
  /// Number of entries equal to their predecessor in sorted column order, summed over columns.
  std::size_t tie_count = 0;

  int n() const { return static_cast<int>(ranks.rows()); }
  int d() const { return static_cast<int>(ranks.cols()); }
};

RankMatrix compute_ranks(const Sample& sample);

/// Reads a CSV with a header row of column names; missing or non-numeric fields are rejected.
Sample read_csv(const std::filesystem::path& path);
Sample parse_csv(std::istream& in);

/// Writes the same shape read_csv accepts. Values use 17 significant digits.
void write_csv(std::ostream& out, const Sample& sample);

}  // namespace stdfm
