#include "shiftiv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "shiftiv/common.hpp"
#include "shiftiv/rng.hpp"

namespace shiftiv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_cell(const std::string& cell, long row, const std::string& col) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !is_finite(v)) {
    throw Error(ErrKind::NonNumericCell, ErrClass::Data,
                "row " + std::to_string(row) + ", column '" + col + "': '" +
                    cell + "' is not a finite number");
  }
  return v;
}

std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw Error(ErrKind::MissingColumn, ErrClass::Data,
                "column '" + name + "' not found in header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

Dataset load_csv(const std::string& path, const ColumnMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrKind::IoError, ErrClass::Data, "cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrKind::IoError, ErrClass::Data, "empty file '" + path + "'");
  }
  const std::vector<std::string> header = split_line(line);
  const std::size_t iy = column_index(header, mapping.y);
  const std::size_t ia = column_index(header, mapping.a);
  const std::size_t iz = column_index(header, mapping.z);
  std::vector<std::size_t> ix;
  ix.reserve(mapping.x.size());
  for (const auto& name : mapping.x) ix.push_back(column_index(header, name));

  Dataset data;
  data.covariate_names = mapping.x;
  long row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrKind::NonNumericCell, ErrClass::Data,
                  "row " + std::to_string(row) + ": expected " +
                      std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    Observation o;
    o.y = parse_cell(cells[iy], row, mapping.y);
    o.a = parse_cell(cells[ia], row, mapping.a);
    if (o.a != 0.0 && o.a != 1.0) {
      throw Error(ErrKind::NonBinaryTreatment, ErrClass::Data,
                  "row " + std::to_string(row) + ": treatment value '" +
                      cells[ia] + "' is not 0 or 1");
    }
    o.z = parse_cell(cells[iz], row, mapping.z);
    o.x.reserve(ix.size());
    for (std::size_t j = 0; j < ix.size(); ++j) {
      o.x.push_back(parse_cell(cells[ix[j]], row, mapping.x[j]));
    }
    data.observations.push_back(std::move(o));
    ++row;
  }
  if (data.observations.empty()) {
    throw Error(ErrKind::IoError, ErrClass::Data,
                "'" + path + "' contains a header but no rows");
  }
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::string out = "y,a,z";
  for (const auto& name : data.covariate_names) {
    out.push_back(',');
    out.append(name);
  }
  out.push_back('\n');
  for (const auto& o : data.observations) {
    append_double(out, o.y);
    out.push_back(',');
    append_double(out, o.a);
    out.push_back(',');
    append_double(out, o.z);
    for (double xv : o.x) {
      out.push_back(',');
      append_double(out, xv);
    }
    out.push_back('\n');
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    throw Error(ErrKind::IoError, ErrClass::Data,
                "cannot write '" + path + "'");
  }
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

ValidationReport validate(const Dataset& data) {
  ValidationReport report;
  if (data.observations.empty()) {
    report.violations.push_back({-1, "n >= 1"});
  }
  const std::size_t d = data.covariate_names.size();
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    const Observation& o = data.observations[i];
    const long row = static_cast<long>(i);
    if (o.a != 0.0 && o.a != 1.0) {
      report.violations.push_back({row, "a in {0,1}"});
    }
    if (!is_finite(o.y)) report.violations.push_back({row, "y finite"});
    if (!is_finite(o.z)) report.violations.push_back({row, "z finite"});
    for (double xv : o.x) {
      if (!is_finite(xv)) {
        report.violations.push_back({row, "x finite"});
        break;
      }
    }
    if (o.x.size() != d) {
      report.violations.push_back({row, "x dimension"});
    }
  }
  return report;
}

std::string ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : violations) {
    arr.push_back({{"row", v.row}, {"invariant", v.invariant}});
  }
  nlohmann::json j{{"ok", ok()}, {"violations", arr}};
  return j.dump(2);
}

FoldAssignment kfold_split(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrKind::BadFoldCount, ErrClass::Config,
                "k=" + std::to_string(k) + " with n=" + std::to_string(n) +
                    " (need 2 <= k <= n)");
  }
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng = Rng(seed).derive(0x666f6c64);  // fold-assignment stream
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng.below(i);
    std::swap(perm[i - 1], perm[j]);
  }
  FoldAssignment f;
  f.fold_of.assign(n, 0);
  f.k = k;
  f.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    f.fold_of[perm[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return f;
}

}  // namespace shiftiv
