#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "stdfm/error.hpp"
#include "stdfm/parameter_space.hpp"
#include "stdfm/sample.hpp"
#include "stdfm/stdf_bounds.hpp"
#include "stdfm/weight_spec.hpp"

using namespace stdfm;

namespace {

Sample column_sample(std::vector<double> a, std::vector<double> b) {
  Eigen::MatrixXd m(a.size(), 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    m(i, 0) = a[i];
    m(i, 1) = b[i];
  }
  return Sample(m);
}

}  // namespace

TEST_CASE("compute_ranks orders strictly increasing data") {
  const auto r = compute_ranks(column_sample({3.1, 1.2, 2.7}, {1, 2, 3}));
  CHECK(r.ranks(0, 0) == 3);
  CHECK(r.ranks(1, 0) == 1);
  CHECK(r.ranks(2, 0) == 2);
  CHECK(r.tie_count == 0);
}

TEST_CASE("compute_ranks breaks ties by row order and counts them") {
  const auto r = compute_ranks(column_sample({5, 5, 1}, {1, 2, 3}));
  CHECK(r.ranks(0, 0) == 2);
  CHECK(r.ranks(1, 0) == 3);
  CHECK(r.ranks(2, 0) == 1);
  CHECK(r.tie_count == 1);
}

TEST_CASE("each rank column is a permutation") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(1500, 3);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = z(gen);
  const auto r = compute_ranks(Sample(m));
  for (int j = 0; j < 3; ++j) {
    std::vector<int> col(r.ranks.col(j).data(), r.ranks.col(j).data() + 1500);
    std::sort(col.begin(), col.end());
    for (int i = 0; i < 1500; ++i) REQUIRE(col[i] == i + 1);
  }
}

TEST_CASE("Sample validation") {
  Eigen::MatrixXd m(3, 2);
  m << 1, 2, 3, 4, 5, std::numeric_limits<double>::quiet_NaN();
  try {
    Sample s(m);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("row 3") != std::string::npos);
    CHECK(what.find("column 2") != std::string::npos);
  }
  CHECK_THROWS_AS(Sample(Eigen::MatrixXd::Ones(1, 2)), DataError);
  CHECK_THROWS_AS(Sample(Eigen::MatrixXd::Ones(5, 1)), DataError);
}

TEST_CASE("CSV round trip and rejection of bad fields") {
  std::istringstream in("a,b\n1.5,2\n3,4e-1\n-1,7\n");
  const Sample s = parse_csv(in);
  CHECK(s.n() == 3);
  CHECK(s.column_names() == std::vector<std::string>{"a", "b"});
  CHECK(s.data()(1, 1) == doctest::Approx(0.4));
  std::ostringstream out;
  write_csv(out, s);
  std::istringstream back(out.str());
  CHECK(parse_csv(back).data() == s.data());

  std::istringstream missing("a,b\n1,\n2,3\n3,4\n");
  CHECK_THROWS_AS(parse_csv(missing), DataError);
  std::istringstream text("a,b\n1,x\n2,3\n3,4\n");
  CHECK_THROWS_AS(parse_csv(text), DataError);
  CHECK_THROWS_AS(read_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("stdf_bounds_check examples") {
  const double x[2] = {1.0, 1.0};
  CHECK(stdf_bounds_check(std::sqrt(2.0), x));
  CHECK_FALSE(stdf_bounds_check(0.9, x));
  CHECK_FALSE(stdf_bounds_check(2.3, x));
  CHECK(stdf_bounds_check(1.0, x));
  CHECK(stdf_bounds_check(2.0, x));
}

TEST_CASE("WeightSpec parsing and evaluation") {
  const auto g = WeightSpec::parse("1;x1;2*x1+2*x2;x1^2*x2", 2);
  CHECK(g.q() == 4);
  const double x[2] = {0.5, 0.25};
  std::vector<double> v(4);
  g.eval(x, v);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 0.5);
  CHECK(v[2] == doctest::Approx(1.5));
  CHECK(v[3] == doctest::Approx(0.0625));
  CHECK(WeightSpec::parse(g.to_string(), 2).to_string() == g.to_string());
  CHECK(g[3].terms[0].single_coordinate() == -2);
  CHECK(g[1].terms[0].single_coordinate() == 0);
  CHECK(g[0].terms[0].single_coordinate() == -1);
  CHECK_THROWS_AS(WeightSpec::parse("x3", 2), DataError);
  CHECK_THROWS_AS(WeightSpec::parse("x1^-1", 2), DataError);
  CHECK_THROWS_AS(WeightSpec::parse("", 2), DataError);
  CHECK_THROWS_AS(WeightSpec::parse("1;;x1", 2), DataError);
}

TEST_CASE("ParameterSpace feasibility and squashing") {
  ParameterSpace s({Interval{0.0, 1.0, true, false}, Interval{0.0, 1.0}},
                   {LinearConstraint{{1.0, 1.0}, 1.5}});
  CHECK(s.contains(std::vector<double>{0.5, 0.5}));
  CHECK_FALSE(s.contains(std::vector<double>{0.0, 0.5}));
  CHECK_FALSE(s.contains(std::vector<double>{0.9, 0.9}));
  CHECK(s.violation(std::vector<double>{0.9, 0.9}) != "");
  CHECK(s.boundary_distance(std::vector<double>{0.5, 0.5}) == doctest::Approx(std::sqrt(0.125)));
  CHECK(s.boundary_distance(std::vector<double>{0.9, 0.9}) < 0.0);
  for (double t : {0.01, 0.3, 0.5, 0.99}) {
    CHECK(squash(unsquash(t, s.boxes()[0]), s.boxes()[0]) == doctest::Approx(t).epsilon(1e-12));
  }
  const Interval half{0.0, std::numeric_limits<double>::infinity()};
  CHECK(squash(unsquash(3.5, half), half) == doctest::Approx(3.5));
}
