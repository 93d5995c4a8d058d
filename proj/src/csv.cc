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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <utility>

#include "json.hpp"

#include "dpasync/errors.h"

namespace dpasync {

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::optional<double> ParseDouble(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

int CategoryDictionary::Encode(const std::string& column,
                               const std::string& value) {
  auto& seen = values_[column];
  const auto it = std::find(seen.begin(), seen.end(), value);
  if (it != seen.end()) return static_cast<int>(it - seen.begin()) + 1;
  seen.push_back(value);
  return static_cast<int>(seen.size());
}

int CategoryDictionary::Lookup(const std::string& column,
                               const std::string& value) const {
  const auto col = values_.find(column);
  if (col == values_.end()) return kUnknownCode;
  const auto it = std::find(col->second.begin(), col->second.end(), value);
  if (it == col->second.end()) return kUnknownCode;
  return static_cast<int>(it - col->second.begin()) + 1;
}

std::string CategoryDictionary::ToJson() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [column, seen] : values_) j[column] = seen;
  return j.dump(2);
}

CategoryDictionary CategoryDictionary::FromJson(const std::string& json) {
  CategoryDictionary out;
  const auto j = nlohmann::json::parse(json);
  for (const auto& [column, seen] : j.items()) {
    out.values_[column] = seen.get<std::vector<std::string>>();
  }
  return out;
}

RawTable ingest_csv(const std::string& path, const TableSchema& schema,
                    const CategoryDictionary* frozen) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open " + path);
  return ingest_csv(in, schema, frozen);
}

RawTable ingest_csv(std::istream& in, const TableSchema& schema,
                    const CategoryDictionary* frozen) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const std::vector<std::string> header = SplitCsvLine(line);

  auto column_index = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw InvalidArgumentError("column not found: " + name);
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t target_col = column_index(schema.target);
  for (const auto& name : schema.drop) column_index(name);
  for (const auto& name : schema.categorical) column_index(name);

  enum class Kind { kNumeric, kCategorical, kSkip };
  std::vector<Kind> kinds(header.size(), Kind::kNumeric);
  RawTable table;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto in_list = [&](const std::vector<std::string>& list) {
      return std::find(list.begin(), list.end(), header[c]) != list.end();
    };
    if (c == target_col || in_list(schema.drop)) {
      kinds[c] = Kind::kSkip;
    } else {
      if (in_list(schema.categorical)) kinds[c] = Kind::kCategorical;
      table.feature_names.push_back(header[c]);
    }
  }
  if (frozen != nullptr) table.categories = *frozen;

  std::vector<double> values;
  std::vector<double> targets;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    const std::string& target_text = fields[target_col];
    if (target_text.find_first_not_of(" \t") == std::string::npos) {
      ++table.dropped_missing_target;
      continue;
    }
    const auto target = ParseDouble(target_text);
    if (!target) throw ParseError("non-numeric target", line_no);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      switch (kinds[c]) {
        case Kind::kSkip:
          break;
        case Kind::kCategorical:
          values.push_back(frozen != nullptr
                               ? table.categories.Lookup(header[c], fields[c])
                               : table.categories.Encode(header[c], fields[c]));
          break;
        case Kind::kNumeric: {
          const auto v = ParseDouble(fields[c]);
          if (!v) {
            throw ParseError("bad numeric value '" + fields[c] +
                                 "' in column " + header[c],
                             line_no);
          }
          values.push_back(*v);
          break;
        }
      }
    }
    targets.push_back(*target);
  }

  const auto rows = static_cast<Eigen::Index>(targets.size());
  const auto cols = static_cast<Eigen::Index>(table.feature_names.size());
  table.features = Eigen::Map<RowMatrix>(values.data(), rows, cols);
  table.targets = Eigen::Map<Vector>(targets.data(), rows);
  return table;
}

void write_table_csv(std::ostream& out, const RawTable& table,
                     const std::string& target_name) {
  for (const auto& name : table.feature_names) out << name << ',';
  out << target_name << '\n';
  for (Eigen::Index r = 0; r < table.features.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.features.cols(); ++c) {
      out << FormatDouble(table.features(r, c)) << ',';
    }
    out << FormatDouble(table.targets(r)) << '\n';
  }
}

void write_owner_csv(std::ostream& out,
                     std::span<const OwnerDataset> datasets) {
  if (datasets.empty()) return;
  out << "owner";
  for (Eigen::Index c = 0; c < datasets.front().dim(); ++c) {
    out << ",x" << (c + 1);
  }
  out << ",y\n";
  for (const OwnerDataset& d : datasets) {
    for (Eigen::Index r = 0; r < d.features().rows(); ++r) {
      out << d.owner_id();
      for (Eigen::Index c = 0; c < d.dim(); ++c) {
        out << ',' << FormatDouble(d.features()(r, c));
      }
      out << ',' << FormatDouble(d.targets()(r)) << '\n';
    }
  }
}

std::vector<OwnerDataset> read_owner_csv(std::istream& in,
                                         std::span<const double> epsilons) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const std::vector<std::string> header = SplitCsvLine(line);
  if (header.size() < 3 || header.front() != "owner" || header.back() != "y") {
    throw ParseError("expected header owner,x1..xp,y", 1);
  }
  const std::size_t p = header.size() - 2;
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw ParseError("wrong field count", line_no);
    }
    const auto owner = ParseDouble(fields[0]);
    if (!owner || *owner < 1 || std::floor(*owner) != *owner) {
      throw ParseError("bad owner id", line_no);
    }
    auto& [x, y] = rows[static_cast<int>(*owner)];
    for (std::size_t c = 1; c <= p; ++c) {
      const auto v = ParseDouble(fields[c]);
      if (!v) throw ParseError("bad numeric value", line_no);
      x.push_back(*v);
    }
    const auto target = ParseDouble(fields.back());
    if (!target) throw ParseError("bad target", line_no);
    y.push_back(*target);
  }
  const int num_owners = static_cast<int>(rows.size());
  if (num_owners == 0) throw InvalidArgumentError("owner csv: no rows");
  if (rows.rbegin()->first != num_owners) {
    throw InvalidArgumentError("owner csv: owner ids must cover 1..N");
  }
  if (epsilons.size() != 1 &&
      epsilons.size() != static_cast<std::size_t>(num_owners)) {
    throw InvalidArgumentError("owner csv: need 1 or N epsilons");
  }
  std::vector<OwnerDataset> out;
  for (auto& [id, xy] : rows) {
    auto& [x, y] = xy;
    const auto n = static_cast<Eigen::Index>(y.size());
    const double eps =
        epsilons.size() == 1 ? epsilons[0]
                             : epsilons[static_cast<std::size_t>(id - 1)];
    out.emplace_back(id,
                     RowMatrix(Eigen::Map<RowMatrix>(
                         x.data(), n, static_cast<Eigen::Index>(p))),
                     Vector(Eigen::Map<Vector>(y.data(), n)), eps);
  }
  return out;
}

std::vector<OwnerDataset> partition_rows(const RowMatrix& features,
                                         const Vector& targets,
                                         std::span<const std::size_t> sizes,
                                         std::span<const double> epsilons) {
  if (epsilons.size() != 1 && epsilons.size() != sizes.size()) {
    throw InvalidArgumentError("partition_rows: need 1 or N epsilons");
  }
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  if (total > static_cast<std::size_t>(targets.size())) {
    throw InvalidArgumentError("partition_rows: sizes exceed row count");
  }
  std::vector<OwnerDataset> out;
  Eigen::Index start = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto len = static_cast<Eigen::Index>(sizes[i]);
    const double eps = epsilons.size() == 1 ? epsilons[0] : epsilons[i];
    out.emplace_back(static_cast<int>(i) + 1,
                     RowMatrix(features.middleRows(start, len)),
                     Vector(targets.segment(start, len)), eps);
    start += len;
  }
  return out;
}

}  // namespace dpasync
