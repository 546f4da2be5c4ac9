#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "lsqtl/csv.hpp"
#include "lsqtl/error.hpp"

using namespace lsqtl;

TEST(Csv, TrimsSkipsBlanksAndCarriageReturns) {
  std::istringstream in(" a , b \r\n\n1, 2\r\n  \n3,4\n");
  const auto t = csv::read(in);
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].fields, (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(t.rows[0].line, 3u);
  EXPECT_EQ(t.rows[1].line, 5u);
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_THROW(t.column("c"), ParseError);
}

TEST(Csv, RejectsRaggedRowsQuotesAndEmptyInput) {
  std::istringstream ragged("a,b\n1,2,3\n");
  try {
    csv::read(ragged);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream quoted("a,b\n\"x\",2\n");
  EXPECT_THROW(csv::read(quoted), ParseError);
  std::istringstream empty("");
  EXPECT_THROW(csv::read(empty), ParseError);
  EXPECT_THROW(csv::read_file("/nonexistent/file.csv"), ParseError);
}

TEST(Csv, StrictNumbers) {
  EXPECT_DOUBLE_EQ(csv::parse_double("-1.5e2", 1, "x"), -150.0);
  EXPECT_THROW(csv::parse_double("1.5x", 4, "x"), ParseError);
  EXPECT_THROW(csv::parse_double("", 4, "x"), ParseError);
  EXPECT_THROW(csv::parse_double("nan", 4, "x"), ParseError);
  EXPECT_EQ(csv::parse_int("42", 1, "n"), 42);
  EXPECT_THROW(csv::parse_int("4.2", 1, "n"), ParseError);
}

TEST(Csv, FormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0475813}) {
    EXPECT_EQ(csv::parse_double(csv::format_double(v), 1, "v"), v);
  }
  EXPECT_EQ(csv::format_double(0.5), "0.5");
}
