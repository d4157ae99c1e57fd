#pragma once

// CSV loading, equal-width quantization of numeric columns, and seeded
// train/test partitioning.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kbx/core.hpp"

namespace kbx {

/// Raw CSV contents: header plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline Table parse_csv(std::istream& in, const std::string& source = "<csv>") {
  Table t;
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  char ch;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty()) {
          throw InputError(source + ":" + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field += ch;
        field_started = true;
    }
  }
  if (in_quotes) throw InputError(source + ": unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  if (records.empty()) throw InputError(source + ": missing header row");
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw InputError(source + ": row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                       " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& out, const Table& t) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(cells[i]);
    }
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Shortest round-trip decimal form.
inline std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

enum class ColumnKind : std::uint8_t { Categorical, Numeric };

struct SchemaHints {
  /// Class column name; empty means the last column. Ignored when has_class is false.
  std::string class_column;
  bool has_class = true;
  std::vector<std::string> categorical;
  std::vector<std::string> numeric;
  /// A fully numeric column is quantized only if it has at least this many
  /// distinct values; otherwise its values are treated as category labels.
  std::size_t numeric_min_distinct = 7;
};

/// CSV after column typing: cells are still strings.
struct LoadedTable {
  std::string source;
  std::vector<std::string> feature_names;
  std::vector<ColumnKind> kinds;
  std::vector<std::vector<std::string>> cells;  // rows x features
  std::optional<std::string> class_name;
  std::vector<std::string> class_cells;

  std::size_t row_count() const { return cells.size(); }
};

inline LoadedTable type_columns(const Table& t, const SchemaHints& hints, const std::string& source) {
  LoadedTable lt;
  lt.source = source;
  std::optional<std::size_t> cls;
  if (hints.has_class) {
    if (t.header.empty()) throw InputError(source + ": no columns");
    if (hints.class_column.empty()) {
      cls = t.header.size() - 1;
    } else {
      auto it = std::find(t.header.begin(), t.header.end(), hints.class_column);
      if (it == t.header.end()) throw InputError(source + ": class column '" + hints.class_column + "' not found");
      cls = static_cast<std::size_t>(it - t.header.begin());
    }
    lt.class_name = t.header[*cls];
  }
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (cls && c == *cls) continue;
    cols.push_back(c);
    lt.feature_names.push_back(t.header[c]);
  }
  auto listed = [](const std::vector<std::string>& v, const std::string& n) {
    return std::find(v.begin(), v.end(), n) != v.end();
  };
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const std::string& name = t.header[cols[k]];
    const bool force_num = listed(hints.numeric, name);
    const bool force_cat = listed(hints.categorical, name);
    bool all_numeric = !t.rows.empty();
    std::set<double> distinct;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      auto v = parse_number(t.rows[r][cols[k]]);
      if (!v) {
        if (force_num) {
          throw InputError(source + ": row " + std::to_string(r + 1) + ", column '" + name +
                           "': cannot parse '" + t.rows[r][cols[k]] + "' as a number");
        }
        all_numeric = false;
        break;
      }
      distinct.insert(*v);
    }
    ColumnKind kind = ColumnKind::Categorical;
    if (force_num) kind = ColumnKind::Numeric;
    else if (!force_cat && all_numeric && distinct.size() >= hints.numeric_min_distinct) kind = ColumnKind::Numeric;
    lt.kinds.push_back(kind);
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<std::string> row;
    row.reserve(cols.size());
    for (std::size_t c : cols) {
      if (t.rows[r][c].empty()) {
        throw InputError(source + ": row " + std::to_string(r + 1) + ", column '" + t.header[c] + "' is empty");
      }
      row.push_back(t.rows[r][c]);
    }
    lt.cells.push_back(std::move(row));
    if (cls) {
      if (t.rows[r][*cls].empty()) {
        throw InputError(source + ": row " + std::to_string(r + 1) + " has an empty class label");
      }
      lt.class_cells.push_back(t.rows[r][*cls]);
    }
  }
  // Categorical domains must have two or more values.
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (lt.kinds[k] != ColumnKind::Categorical || t.rows.empty()) continue;
    std::set<std::string> d;
    for (const auto& row : lt.cells) d.insert(row[k]);
    if (d.size() < 2) {
      throw InputError(source + ": column '" + lt.feature_names[k] + "' has a domain of size " +
                       std::to_string(d.size()) + " (at least 2 required)");
    }
  }
  return lt;
}

inline LoadedTable load_csv(const std::string& path, const SchemaHints& hints = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return type_columns(parse_csv(in, path), hints, path);
}

struct QuantizationSpec {
  struct Column {
    std::string name;
    std::vector<double> cuts;  // strictly increasing; intervals = cuts + 1

    std::size_t intervals() const { return cuts.size() + 1; }
  };
  std::vector<Column> columns;

  const Column* find(const std::string& name) const {
    for (const auto& c : columns) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

/// Interval labels: `<=c1`, `(c1,c2]`, ..., `>ck`.
inline std::vector<std::string> interval_labels(const QuantizationSpec::Column& col) {
  std::vector<std::string> labels;
  const auto& c = col.cuts;
  labels.push_back("<=" + format_number(c.front()));
  for (std::size_t i = 1; i < c.size(); ++i) {
    labels.push_back("(" + format_number(c[i - 1]) + "," + format_number(c[i]) + "]");
  }
  labels.push_back(">" + format_number(c.back()));
  return labels;
}

/// Interval of a value: values on a cut fall in the lower interval and
/// out-of-range values clamp to the extreme intervals.
inline ValueIndex interval_of(const QuantizationSpec::Column& col, double v) {
  auto it = std::lower_bound(col.cuts.begin(), col.cuts.end(), v);
  return static_cast<ValueIndex>(it - col.cuts.begin());
}

inline void validate_column(const QuantizationSpec::Column& c) {
  if (c.cuts.empty()) throw InputError("quantization of '" + c.name + "' has no cut points");
  for (std::size_t i = 1; i < c.cuts.size(); ++i) {
    if (!(c.cuts[i - 1] < c.cuts[i])) {
      throw InputError("quantization cut points of '" + c.name + "' are not strictly increasing");
    }
  }
}

/// Fits equal-width cut points for every numeric column on the given rows
/// (all rows when `rows` is empty).
inline QuantizationSpec fit_quantization(const LoadedTable& t, std::size_t intervals,
                                         std::span<const std::size_t> rows = {},
                                         const std::map<std::string, std::vector<double>>& explicit_cuts = {}) {
  if (intervals < 2) throw PreconditionError("quantization needs at least 2 intervals");
  QuantizationSpec spec;
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(t.row_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    rows = all;
  }
  for (std::size_t k = 0; k < t.feature_names.size(); ++k) {
    if (t.kinds[k] != ColumnKind::Numeric) continue;
    QuantizationSpec::Column col{t.feature_names[k], {}};
    if (auto it = explicit_cuts.find(col.name); it != explicit_cuts.end()) {
      col.cuts = it->second;
    } else {
      if (rows.empty()) throw InputError("cannot fit quantization of '" + col.name + "' on zero rows");
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t r : rows) {
        auto v = parse_number(t.cells.at(r)[k]);
        if (!v) {
          throw InputError(t.source + ": row " + std::to_string(r + 1) + ", column '" + col.name +
                           "': cannot parse '" + t.cells[r][k] + "' as a number");
        }
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
      if (!(lo < hi)) throw InputError("column '" + col.name + "' is constant; cannot quantize");
      const double width = (hi - lo) / static_cast<double>(intervals);
      for (std::size_t i = 1; i < intervals; ++i) col.cuts.push_back(lo + width * static_cast<double>(i));
    }
    validate_column(col);
    spec.columns.push_back(std::move(col));
  }
  return spec;
}

struct ClassColumn {
  std::string name;
  std::vector<std::string> labels;
  std::vector<ClassIndex> values;  // one per row
};

struct Dataset {
  SpacePtr space;
  std::vector<Instance> rows;
  std::optional<ClassColumn> classes;

  std::size_t size() const { return rows.size(); }

  Dataset subset(std::span<const std::size_t> idx) const {
    Dataset d{space, {}, {}};
    if (classes) d.classes = ClassColumn{classes->name, classes->labels, {}};
    for (std::size_t i : idx) {
      d.rows.push_back(rows.at(i));
      if (classes) d.classes->values.push_back(classes->values.at(i));
    }
    return d;
  }

  Dataset without_class() const { return Dataset{space, rows, std::nullopt}; }
};

namespace detail {

inline std::vector<std::string> first_appearance(const std::vector<std::string>& cells) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& c : cells) {
    if (seen.insert(c).second) order.push_back(c);
  }
  return order;
}

}  // namespace detail

/// Maps every cell to a value index. Numeric columns must be covered by the
/// spec; a spec column may also hold its own interval labels, which makes
/// quantization idempotent.
inline Dataset quantize(const LoadedTable& t, const QuantizationSpec& spec) {
  const std::size_t m = t.feature_names.size();
  for (const auto& c : spec.columns) {
    if (std::find(t.feature_names.begin(), t.feature_names.end(), c.name) == t.feature_names.end()) {
      throw InputError("quantization spec names unknown column '" + c.name + "'");
    }
    validate_column(c);
  }
  std::vector<Feature> features;
  std::vector<const QuantizationSpec::Column*> qcol(m, nullptr);
  for (std::size_t k = 0; k < m; ++k) {
    qcol[k] = spec.find(t.feature_names[k]);
    if (t.kinds[k] == ColumnKind::Numeric && !qcol[k]) {
      throw InputError("numeric column '" + t.feature_names[k] + "' is not covered by the quantization spec");
    }
    if (qcol[k]) {
      features.push_back({t.feature_names[k], interval_labels(*qcol[k])});
    } else {
      std::vector<std::string> col;
      col.reserve(t.row_count());
      for (const auto& row : t.cells) col.push_back(row[k]);
      features.push_back({t.feature_names[k], detail::first_appearance(col)});
    }
  }
  auto space = std::make_shared<const FeatureSpace>(std::move(features));
  Dataset ds{space, {}, {}};
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    std::vector<ValueIndex> vals(m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::string& cell = t.cells[r][k];
      if (qcol[k]) {
        if (auto v = parse_number(cell)) {
          vals[k] = interval_of(*qcol[k], *v);
        } else if (auto idx = space->find_value(k, cell)) {
          vals[k] = *idx;
        } else {
          throw InputError(t.source + ": row " + std::to_string(r + 1) + ", column '" + t.feature_names[k] +
                           "': '" + cell + "' is neither a number nor an interval label");
        }
      } else {
        vals[k] = space->value_index(k, cell);
      }
    }
    ds.rows.emplace_back(std::move(vals));
  }
  if (t.class_name) {
    ClassColumn cc{*t.class_name, detail::first_appearance(t.class_cells), {}};
    if (cc.labels.empty() && t.row_count() > 0) throw InputError(t.source + ": empty class domain");
    for (const auto& c : t.class_cells) {
      cc.values.push_back(static_cast<ClassIndex>(std::find(cc.labels.begin(), cc.labels.end(), c) - cc.labels.begin()));
    }
    ds.classes = std::move(cc);
  }
  return ds;
}

/// Reads the table into an existing feature space (e.g. a model's), matching
/// columns by name and values by label. Numeric cells of quantized columns are
/// binned with the spec when one is given.
inline Dataset dataset_in_space(const LoadedTable& t, SpacePtr space, const QuantizationSpec* spec = nullptr,
                                const std::vector<std::string>* class_labels = nullptr) {
  std::vector<std::size_t> col_of(space->size());
  for (std::size_t f = 0; f < space->size(); ++f) {
    auto it = std::find(t.feature_names.begin(), t.feature_names.end(), (*space)[f].name);
    if (it == t.feature_names.end()) throw InputError(t.source + ": missing feature column '" + (*space)[f].name + "'");
    col_of[f] = static_cast<std::size_t>(it - t.feature_names.begin());
  }
  Dataset ds{space, {}, {}};
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    std::vector<ValueIndex> vals(space->size());
    for (std::size_t f = 0; f < space->size(); ++f) {
      const std::string& cell = t.cells[r][col_of[f]];
      if (auto idx = space->find_value(f, cell)) {
        vals[f] = *idx;
        continue;
      }
      const QuantizationSpec::Column* q = spec ? spec->find((*space)[f].name) : nullptr;
      auto num = parse_number(cell);
      if (q && num) {
        vals[f] = interval_of(*q, *num);
      } else {
        throw InputError(t.source + ": row " + std::to_string(r + 1) + ": value '" + cell + "' is not in the domain of '" +
                         (*space)[f].name + "'");
      }
    }
    ds.rows.emplace_back(std::move(vals));
  }
  if (t.class_name) {
    ClassColumn cc{*t.class_name, class_labels ? *class_labels : detail::first_appearance(t.class_cells), {}};
    for (std::size_t r = 0; r < t.class_cells.size(); ++r) {
      auto it = std::find(cc.labels.begin(), cc.labels.end(), t.class_cells[r]);
      if (it == cc.labels.end()) {
        throw InputError(t.source + ": row " + std::to_string(r + 1) + ": unknown class '" + t.class_cells[r] + "'");
      }
      cc.values.push_back(static_cast<ClassIndex>(it - cc.labels.begin()));
    }
    ds.classes = std::move(cc);
  }
  return ds;
}

/// Labelled table view of a dataset (value labels as cells).
inline LoadedTable to_table(const Dataset& ds) {
  LoadedTable t;
  t.source = "<dataset>";
  for (const auto& f : ds.space->features()) {
    t.feature_names.push_back(f.name);
    t.kinds.push_back(ColumnKind::Categorical);
  }
  for (const auto& row : ds.rows) {
    std::vector<std::string> cells;
    for (std::size_t f = 0; f < row.size(); ++f) cells.push_back((*ds.space)[f].values[row[f]]);
    t.cells.push_back(std::move(cells));
  }
  if (ds.classes) {
    t.class_name = ds.classes->name;
    for (auto c : ds.classes->values) t.class_cells.push_back(ds.classes->labels[c]);
  }
  return t;
}

inline Table to_csv_table(const Dataset& ds) {
  LoadedTable lt = to_table(ds);
  Table t;
  t.header = lt.feature_names;
  if (lt.class_name) t.header.push_back(*lt.class_name);
  for (std::size_t r = 0; r < lt.cells.size(); ++r) {
    auto row = lt.cells[r];
    if (lt.class_name) row.push_back(lt.class_cells[r]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Seeded permutation of 0..n-1. Uses its own Fisher-Yates so the result does
/// not depend on the standard library's shuffle implementation.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    std::swap(p[i - 1], p[x % bound]);
  }
  return p;
}

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

inline IndexSplit split_indices(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw PreconditionError("split fraction must lie in (0, 1), got " + format_number(fraction));
  }
  auto p = seeded_permutation(n, seed);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  IndexSplit s;
  s.train.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(p.begin() + static_cast<std::ptrdiff_t>(n_train), p.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

inline std::vector<IndexSplit> fold_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw PreconditionError("cross validation needs at least 2 folds");
  if (k > n) {
    throw PreconditionError("cannot make " + std::to_string(k) + " folds from " + std::to_string(n) + " rows");
  }
  auto p = seeded_permutation(n, seed);
  std::vector<IndexSplit> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t lo = i * n / k, hi = (i + 1) * n / k;
    for (std::size_t j = 0; j < n; ++j) {
      (j >= lo && j < hi ? out[i].test : out[i].train).push_back(p[j]);
    }
    std::sort(out[i].train.begin(), out[i].train.end());
    std::sort(out[i].test.begin(), out[i].test.end());
  }
  return out;
}

inline std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
  auto s = split_indices(ds.size(), fraction, seed);
  return {ds.subset(s.train), ds.subset(s.test)};
}

inline std::vector<std::pair<Dataset, Dataset>> folds(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  std::vector<std::pair<Dataset, Dataset>> out;
  for (const auto& f : fold_indices(ds.size(), k, seed)) out.emplace_back(ds.subset(f.train), ds.subset(f.test));
  return out;
}

}  // namespace kbx
