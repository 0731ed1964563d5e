//
// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPAUDIT_CORE_HPP_
#define DPAUDIT_CORE_HPP_

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dpaudit {

struct Attribute {
  std::string name;
  std::vector<std::string> categories;
};

// Immutable description of a categorical table: attribute names and their
// category domains. The schema is the single string<->index authority;
// records below store indices only.
class Schema {
 public:
  explicit Schema(std::vector<Attribute> attributes)
      : attributes_(std::move(attributes)) {
    std::set<std::string> names;
    for (const Attribute& a : attributes_) {
      if (!names.insert(a.name).second) {
        throw std::invalid_argument("Schema: duplicate attribute name '" +
                                    a.name + "'");
      }
      if (a.categories.empty()) {
        throw std::invalid_argument("Schema: attribute '" + a.name +
                                    "' has no categories");
      }
      std::set<std::string> cats(a.categories.begin(), a.categories.end());
      if (cats.size() != a.categories.size()) {
        throw std::invalid_argument("Schema: attribute '" + a.name +
                                    "' has duplicate categories");
      }
    }
  }

  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::size_t attr_count() const { return attributes_.size(); }
  std::size_t domain_size(std::size_t a) const {
    return attributes_.at(a).categories.size();
  }

  std::size_t one_hot_dim() const {
    std::size_t d = 0;
    for (const Attribute& a : attributes_) d += a.categories.size();
    return d;
  }

  const std::string& category_name(std::size_t a, std::int32_t idx) const {
    const auto& cats = attributes_.at(a).categories;
    if (idx < 0 || static_cast<std::size_t>(idx) >= cats.size()) {
      throw std::invalid_argument("Schema: category index out of range");
    }
    return cats[static_cast<std::size_t>(idx)];
  }

  // Returns -1 when the value is not in the attribute's domain.
  std::int32_t category_index(std::size_t a, const std::string& value) const {
    const auto& cats = attributes_.at(a).categories;
    for (std::size_t i = 0; i < cats.size(); ++i) {
      if (cats[i] == value) return static_cast<std::int32_t>(i);
    }
    return -1;
  }

  friend bool operator==(const Schema& lhs, const Schema& rhs) {
    if (lhs.attributes_.size() != rhs.attributes_.size()) return false;
    for (std::size_t i = 0; i < lhs.attributes_.size(); ++i) {
      if (lhs.attributes_[i].name != rhs.attributes_[i].name) return false;
      if (lhs.attributes_[i].categories != rhs.attributes_[i].categories) {
        return false;
      }
    }
    return true;
  }
  friend bool operator!=(const Schema& lhs, const Schema& rhs) {
    return !(lhs == rhs);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json attrs = nlohmann::ordered_json::array();
    for (const Attribute& a : attributes_) {
      attrs.push_back({{"name", a.name}, {"categories", a.categories}});
    }
    return nlohmann::ordered_json{{"attributes", attrs}};
  }

  static Schema from_json(const nlohmann::json& j) {
    std::vector<Attribute> attrs;
    for (const auto& a : j.at("attributes")) {
      attrs.push_back(Attribute{a.at("name").get<std::string>(),
                                a.at("categories")
                                    .get<std::vector<std::string>>()});
    }
    return Schema(std::move(attrs));
  }

 private:
  std::vector<Attribute> attributes_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

// One row: a category index per schema attribute.
struct Record {
  std::vector<std::int32_t> values;

  friend bool operator==(const Record& a, const Record& b) {
    return a.values == b.values;
  }
  friend bool operator!=(const Record& a, const Record& b) {
    return !(a == b);
  }
  friend bool operator<(const Record& a, const Record& b) {
    return a.values < b.values;
  }
};

inline bool record_valid(const Schema& s, const Record& r) {
  if (r.values.size() != s.attr_count()) return false;
  for (std::size_t a = 0; a < r.values.size(); ++a) {
    if (r.values[a] < 0 ||
        static_cast<std::size_t>(r.values[a]) >= s.domain_size(a)) {
      return false;
    }
  }
  return true;
}

// Ordered multiset of records sharing one schema. Insertion order is kept so
// that seeded consumers (batching, shadow runs) are reproducible.
struct Dataset {
  SchemaPtr schema;
  std::vector<Record> rows;

  Dataset(SchemaPtr s, std::vector<Record> r)
      : schema(std::move(s)), rows(std::move(r)) {
    if (!schema) throw std::invalid_argument("Dataset: null schema");
    for (const Record& row : rows) {
      if (!record_valid(*schema, row)) {
        throw std::invalid_argument("Dataset: row invalid under schema");
      }
    }
  }

  std::size_t size() const { return rows.size(); }
};

enum class NeighborVariant { kAddRemove, kEdit };

// A pair of neighboring datasets (the two worlds of the distinguishing
// game) plus the target record that tells them apart.
struct NeighborPair {
  Dataset d0;
  Dataset d1;
  NeighborVariant variant;
  Record x_t;
  std::optional<Record> y;
};

// One-hot encoding of a record: one unit block per attribute.
inline std::vector<double> encode_one_hot(const Record& r, const Schema& s) {
  if (!record_valid(s, r)) {
    throw std::invalid_argument("encode_one_hot: record invalid under schema");
  }
  std::vector<double> v(s.one_hot_dim(), 0.0);
  std::size_t offset = 0;
  for (std::size_t a = 0; a < s.attr_count(); ++a) {
    v[offset + static_cast<std::size_t>(r.values[a])] = 1.0;
    offset += s.domain_size(a);
  }
  return v;
}

inline NeighborPair make_neighbors(const Dataset& d_minus, const Record& x_t,
                                   NeighborVariant variant,
                                   std::optional<Record> y = std::nullopt) {
  if (!record_valid(*d_minus.schema, x_t)) {
    throw std::invalid_argument("make_neighbors: x_t invalid under schema");
  }
  if (variant == NeighborVariant::kAddRemove) {
    std::vector<Record> r1 = d_minus.rows;
    r1.push_back(x_t);
    return NeighborPair{Dataset(d_minus.schema, d_minus.rows),
                        Dataset(d_minus.schema, std::move(r1)), variant, x_t,
                        std::nullopt};
  }
  if (!y.has_value()) {
    throw std::invalid_argument("make_neighbors: edit variant requires y");
  }
  if (!record_valid(*d_minus.schema, *y)) {
    throw std::invalid_argument("make_neighbors: y invalid under schema");
  }
  if (*y == x_t) {
    throw std::invalid_argument(
        "make_neighbors: degenerate pair, y must differ from x_t");
  }
  std::vector<Record> r0 = d_minus.rows;
  r0.push_back(*y);
  std::vector<Record> r1 = d_minus.rows;
  r1.push_back(x_t);
  return NeighborPair{Dataset(d_minus.schema, std::move(r0)),
                      Dataset(d_minus.schema, std::move(r1)), variant, x_t, y};
}

// Raw string table, the shape of a CSV file before a schema is attached.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads the schema straight off the observed data: each attribute's domain
// is the lexicographically sorted set of values seen in its column. This is
// the inference step whose use in place of a fixed schema constitutes the
// metadata bug.
inline Schema infer_metadata(const RawTable& table) {
  if (table.rows.empty()) {
    throw std::invalid_argument("infer_metadata: empty table");
  }
  std::vector<Attribute> attrs;
  for (std::size_t a = 0; a < table.header.size(); ++a) {
    std::set<std::string> values;
    for (const auto& row : table.rows) {
      if (row.size() != table.header.size()) {
        throw std::invalid_argument("infer_metadata: ragged table");
      }
      values.insert(row[a]);
    }
    attrs.push_back(Attribute{
        table.header[a], std::vector<std::string>(values.begin(),
                                                  values.end())});
  }
  return Schema(std::move(attrs));
}

inline RawTable to_raw_table(const Dataset& d) {
  RawTable t;
  for (const Attribute& a : d.schema->attributes()) t.header.push_back(a.name);
  for (const Record& r : d.rows) {
    std::vector<std::string> row;
    for (std::size_t a = 0; a < r.values.size(); ++a) {
      row.push_back(d.schema->category_name(a, r.values[a]));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace internal {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += "\"";
  return out;
}

}  // namespace internal

inline RawTable load_raw_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  RawTable t;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("CSV file missing header row: " + path);
  }
  t.header = internal::split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(internal::split_csv_line(line));
  }
  return t;
}

inline Dataset dataset_from_raw_table(const RawTable& t, SchemaPtr schema) {
  if (t.header.size() != schema->attr_count()) {
    throw std::invalid_argument("CSV column count does not match schema");
  }
  for (std::size_t a = 0; a < t.header.size(); ++a) {
    if (t.header[a] != schema->attributes()[a].name) {
      throw std::invalid_argument("CSV header '" + t.header[a] +
                                  "' does not match schema attribute '" +
                                  schema->attributes()[a].name + "'");
    }
  }
  std::vector<Record> rows;
  for (const auto& raw : t.rows) {
    Record r;
    for (std::size_t a = 0; a < raw.size(); ++a) {
      std::int32_t idx = schema->category_index(a, raw[a]);
      if (idx < 0) {
        throw std::invalid_argument("CSV value '" + raw[a] +
                                    "' not in domain of attribute '" +
                                    schema->attributes()[a].name + "'");
      }
      r.values.push_back(idx);
    }
    rows.push_back(std::move(r));
  }
  return Dataset(std::move(schema), std::move(rows));
}

inline Dataset load_dataset_csv(const std::string& path, SchemaPtr schema) {
  return dataset_from_raw_table(load_raw_table_csv(path), std::move(schema));
}

inline void save_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  const auto& attrs = d.schema->attributes();
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    out << (a ? "," : "") << internal::csv_escape(attrs[a].name);
  }
  out << "\n";
  for (const Record& r : d.rows) {
    for (std::size_t a = 0; a < r.values.size(); ++a) {
      out << (a ? "," : "")
          << internal::csv_escape(d.schema->category_name(a, r.values[a]));
    }
    out << "\n";
  }
}

inline void save_schema_json(const Schema& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write schema file: " + path);
  out << s.to_json().dump(2) << "\n";
}

inline Schema load_schema_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file: " + path);
  nlohmann::json j;
  in >> j;
  return Schema::from_json(j);
}

}  // namespace dpaudit

#endif  // DPAUDIT_CORE_HPP_
