// Copyright 2026 The dpasync Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpasync/csv.h"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "dpasync/errors.h"
#include "dpasync/random.h"

namespace dpasync {
namespace {

TEST(FormatDoubleTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(3.0), "3");
  EXPECT_EQ(FormatDouble(-2.5e-7), "-2.5e-07");
  EXPECT_EQ(FormatDouble(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(FormatDouble(std::nan("")), "nan");
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::ldexp(Uniform01(rng) - 0.5, static_cast<int>(rng() % 80) - 40);
    EXPECT_EQ(ParseDouble(FormatDouble(x)).value(), x);
  }
}

TEST(ParseDoubleTest, Cases) {
  EXPECT_EQ(ParseDouble(" 1.5 ").value(), 1.5);
  EXPECT_EQ(ParseDouble("+2").value(), 2.0);
  EXPECT_EQ(ParseDouble("-1e3").value(), -1000.0);
  EXPECT_FALSE(ParseDouble("").has_value());
  EXPECT_FALSE(ParseDouble("abc").has_value());
  EXPECT_FALSE(ParseDouble("1.5x").has_value());
}

TEST(SplitCsvLineTest, Quotes) {
  EXPECT_EQ(SplitCsvLine("a,b,,c"),
            (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(SplitCsvLine("\"x,y\",\"say \"\"hi\"\"\",z\r"),
            (std::vector<std::string>{"x,y", "say \"hi\"", "z"}));
}

TEST(CategoryDictionaryTest, FirstAppearanceOrder) {
  CategoryDictionary d;
  EXPECT_EQ(d.Encode("grade", "A"), 1);
  EXPECT_EQ(d.Encode("grade", "B"), 2);
  EXPECT_EQ(d.Encode("grade", "A"), 1);
  EXPECT_EQ(d.Encode("state", "NY"), 1);
  EXPECT_EQ(d.Lookup("grade", "B"), 2);
  EXPECT_EQ(d.Lookup("grade", "Z"), CategoryDictionary::kUnknownCode);
  EXPECT_EQ(d.Lookup("missing", "A"), CategoryDictionary::kUnknownCode);
  EXPECT_EQ(CategoryDictionary::FromJson(d.ToJson()), d);
}

TEST(IngestCsvTest, EncodesCategoricalsByFirstAppearance) {
  std::istringstream in("id,cat,x,y\n7,A,1.5,1\n8,B,2.5,2\n9,A,3.5,3\n");
  const RawTable t = ingest_csv(in, TableSchema{"y", {"id"}, {"cat"}});
  EXPECT_EQ(t.feature_names, (std::vector<std::string>{"cat", "x"}));
  ASSERT_EQ(t.features.rows(), 3);
  EXPECT_EQ(t.features(0, 0), 1);
  EXPECT_EQ(t.features(1, 0), 2);
  EXPECT_EQ(t.features(2, 0), 1);
  EXPECT_EQ(t.features(2, 1), 3.5);
  EXPECT_EQ(t.targets(1), 2.0);
}

TEST(IngestCsvTest, DropsRowsWithoutTarget) {
  std::istringstream in("x,y\n1,2\n3,\n5, \n7,8\n");
  const RawTable t = ingest_csv(in, TableSchema{"y", {}, {}});
  EXPECT_EQ(t.features.rows(), 2);
  EXPECT_EQ(t.dropped_missing_target, 2u);
  EXPECT_EQ(t.targets(1), 8.0);
}

TEST(IngestCsvTest, ReportsMalformedRowNumber) {
  std::istringstream bad_value("x,y\n1,2\noops,3\n");
  try {
    ingest_csv(bad_value, TableSchema{"y", {}, {}});
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  std::istringstream short_row("x,y\n1,2\n3,4\n5\n");
  try {
    ingest_csv(short_row, TableSchema{"y", {}, {}});
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
  }
  std::istringstream no_column("x,z\n1,2\n");
  EXPECT_THROW(ingest_csv(no_column, TableSchema{"y", {}, {}}),
               InvalidArgumentError);
}

TEST(IngestCsvTest, FrozenDictionaryMapsUnknownToZero) {
  std::istringstream fit("c,y\nA,1\nB,2\n");
  const RawTable first = ingest_csv(fit, TableSchema{"y", {}, {"c"}});
  std::istringstream apply("c,y\nB,1\nC,2\nA,3\n");
  const RawTable second =
      ingest_csv(apply, TableSchema{"y", {}, {"c"}}, &first.categories);
  EXPECT_EQ(second.features(0, 0), 2);
  EXPECT_EQ(second.features(1, 0), 0);
  EXPECT_EQ(second.features(2, 0), 1);
  EXPECT_EQ(second.categories, first.categories);
}

TEST(IngestCsvTest, ExportRoundTripIsBitExact) {
  Rng rng(5);
  std::ostringstream src;
  src << "a,b,target\n";
  std::vector<double> values;
  for (int r = 0; r < 50; ++r) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::ldexp(Uniform01(rng) - 0.3, static_cast<int>(rng() % 30) - 15);
      values.push_back(v);
      src << FormatDouble(v) << (c < 2 ? "," : "\n");
    }
  }
  std::istringstream in(src.str());
  const RawTable t = ingest_csv(in, TableSchema{"target", {}, {}});
  std::ostringstream out;
  write_table_csv(out, t, "target");
  EXPECT_EQ(out.str(), src.str());
  std::istringstream again(out.str());
  const RawTable u = ingest_csv(again, TableSchema{"target", {}, {}});
  EXPECT_EQ(u.features, t.features);
  EXPECT_EQ(u.targets, t.targets);
}

TEST(OwnerCsvTest, RoundTrip) {
  RowMatrix x(5, 2);
  x << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10.25;
  Vector y(5);
  y << 1, 2, 3, 4, 5;
  const std::vector<std::size_t> sizes = {2, 3};
  const std::vector<double> eps = {0.5, 2.0};
  const auto owners = partition_rows(x, y, sizes, eps);
  ASSERT_EQ(owners.size(), 2u);
  EXPECT_EQ(owners[1].owner_id(), 2);
  EXPECT_EQ(owners[1].epsilon(), 2.0);
  EXPECT_EQ(owners[1].features()(0, 0), 5.0);
  std::ostringstream out;
  write_owner_csv(out, owners);
  EXPECT_EQ(out.str().substr(0, 15), "owner,x1,x2,y\n1");
  std::istringstream in(out.str());
  const auto back = read_owner_csv(in, eps);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].features(), owners[i].features());
    EXPECT_EQ(back[i].targets(), owners[i].targets());
    EXPECT_EQ(back[i].epsilon(), owners[i].epsilon());
  }
}

TEST(OwnerCsvTest, RejectsGapsAndBadBudgets) {
  std::istringstream gap("owner,x1,y\n1,0,1\n3,0,1\n");
  const std::vector<double> one = {1.0};
  EXPECT_THROW(read_owner_csv(gap, one), InvalidArgumentError);
  std::istringstream ok("owner,x1,y\n1,0,1\n2,0,1\n");
  const std::vector<double> three = {1.0, 2.0, 3.0};
  EXPECT_THROW(read_owner_csv(ok, three), InvalidArgumentError);
  std::istringstream header("id,x1,y\n1,0,1\n");
  EXPECT_THROW(read_owner_csv(header, one), ParseError);
}

TEST(PartitionRowsTest, RejectsOversizedSplit) {
  const RowMatrix x = RowMatrix::Zero(3, 1);
  const Vector y = Vector::Zero(3);
  const std::vector<std::size_t> sizes = {2, 2};
  const std::vector<double> eps = {1.0};
  EXPECT_THROW(partition_rows(x, y, sizes, eps), InvalidArgumentError);
}

}  // namespace
}  // namespace dpasync
