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

// CSV ingestion and export for raw tables and owner-partitioned data.

#ifndef DPASYNC_CSV_H_
#define DPASYNC_CSV_H_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpasync/model.h"

namespace dpasync {

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double value);

// Whole-field parse; accepts "inf", "-inf" and "nan".
std::optional<double> ParseDouble(std::string_view text);

// Splits one CSV record. Double quotes group fields and "" escapes a quote.
std::vector<std::string> SplitCsvLine(std::string_view line);

// Integer codes for categorical columns, assigned 1, 2, ... in order of
// first appearance. Code 0 is reserved for values unseen when the
// dictionary was built.
class CategoryDictionary {
 public:
  static constexpr int kUnknownCode = 0;

  // Returns the existing code or assigns the next one.
  int Encode(const std::string& column, const std::string& value);
  // Returns kUnknownCode for unseen values.
  int Lookup(const std::string& column, const std::string& value) const;

  const std::map<std::string, std::vector<std::string>>& columns() const {
    return values_;
  }

  std::string ToJson() const;
  static CategoryDictionary FromJson(const std::string& json);

  bool operator==(const CategoryDictionary&) const = default;

 private:
  std::map<std::string, std::vector<std::string>> values_;
};

struct TableSchema {
  std::string target;
  std::vector<std::string> drop;         // identifiers and irrelevant columns
  std::vector<std::string> categorical;  // encoded with CategoryDictionary
};

struct RawTable {
  std::vector<std::string> feature_names;
  RowMatrix features;
  Vector targets;
  std::size_t dropped_missing_target = 0;
  CategoryDictionary categories;
};

// Reads a headed CSV. Rows with an empty target are dropped and counted.
// If `frozen` is given, categories are looked up in it (unknown -> 0)
// instead of being assigned. Throws ParseError carrying the line number on
// malformed rows, and InvalidArgumentError if a declared column is absent.
RawTable ingest_csv(const std::string& path, const TableSchema& schema,
                    const CategoryDictionary* frozen = nullptr);
RawTable ingest_csv(std::istream& in, const TableSchema& schema,
                    const CategoryDictionary* frozen = nullptr);

// Header: feature names then the target column name.
void write_table_csv(std::ostream& out, const RawTable& table,
                     const std::string& target_name);

// Owner-partitioned data with header owner,x1..xp,y.
void write_owner_csv(std::ostream& out,
                     std::span<const OwnerDataset> datasets);

// Reads owner,x1..xp,y rows. Owner ids must cover 1..N. epsilons holds one
// budget per owner, or a single value applied to every owner.
std::vector<OwnerDataset> read_owner_csv(std::istream& in,
                                         std::span<const double> epsilons);

// Partitions rows contiguously: owner 1 takes the first sizes[0] rows, ...
std::vector<OwnerDataset> partition_rows(const RowMatrix& features,
                                         const Vector& targets,
                                         std::span<const std::size_t> sizes,
                                         std::span<const double> epsilons);

}  // namespace dpasync

#endif  // DPASYNC_CSV_H_
