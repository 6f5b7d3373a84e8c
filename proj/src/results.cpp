#include "latent_ot/harness.hpp"

#include "latent_ot/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace latent_ot {

namespace {

constexpr std::string_view kHeader = "experiment,seed,N,n,m,eps,estimator,metric,value";

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double parse_number(const std::string& field, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  require(!field.empty() && end == field.c_str() + field.size(), ErrorKind::InvalidInput,
          "csv line " + std::to_string(line) + ": bad number '" + field + "'");
  return v;
}

template <typename Int>
Int parse_integer(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  long long v = 0;
  try {
    if constexpr (std::is_unsigned_v<Int>) {
      v = static_cast<long long>(std::stoull(field, &used));
    } else {
      v = std::stoll(field, &used);
    }
  } catch (const std::exception&) {
    used = 0;
  }
  require(!field.empty() && used == field.size(), ErrorKind::InvalidInput,
          "csv line " + std::to_string(line) + ": bad integer '" + field + "'");
  return static_cast<Int>(v);
}

double canonical(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

void check_label(const std::string& s) {
  require(!s.empty() && s.find_first_of(",\n\r\"") == std::string::npos, ErrorKind::InvalidInput,
          "result table: label '" + s + "' is empty or contains separators");
}

auto key(const ResultRow& r) { return std::tie(r.experiment, r.N, r.seed, r.estimator, r.metric); }

}  // namespace

void ResultTable::add(ResultRow row) {
  check_label(row.experiment);
  check_label(row.estimator);
  check_label(row.metric);
  row.eps = canonical(row.eps);
  row.value = canonical(row.value);
  rows_.push_back(std::move(row));
}

void ResultTable::append(const std::vector<ResultRow>& rows) {
  for (const auto& row : rows) add(row);
}

void ResultTable::sort() {
  std::stable_sort(rows_.begin(), rows_.end(),
                   [](const ResultRow& a, const ResultRow& b) { return key(a) < key(b); });
  for (std::size_t k = 1; k < rows_.size(); ++k) {
    require(key(rows_[k - 1]) != key(rows_[k]), ErrorKind::InvalidInput,
            "result table: duplicate row for " + rows_[k].experiment + "/" + rows_[k].estimator +
                "/" + rows_[k].metric + " at N=" + std::to_string(rows_[k].N));
  }
}

bool ResultTable::has_metric(std::string_view metric) const {
  return std::any_of(rows_.begin(), rows_.end(), [&](const ResultRow& r) { return r.metric == metric; });
}

std::vector<std::string> ResultTable::estimators(std::string_view metric) const {
  std::set<std::string> names;
  for (const auto& r : rows_) {
    if (r.metric == metric) names.insert(r.estimator);
  }
  return {names.begin(), names.end()};
}

std::vector<std::pair<double, double>> median_by_n(const ResultTable& table,
                                                   std::string_view estimator,
                                                   std::string_view metric) {
  std::map<int, std::vector<double>> groups;
  for (const auto& r : table.rows()) {
    if (r.estimator == estimator && r.metric == metric && !std::isnan(r.value)) {
      groups[r.N].push_back(r.value);
    }
  }
  std::vector<std::pair<double, double>> out;
  for (auto& [size, values] : groups) {
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    const double median =
        values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    out.emplace_back(static_cast<double>(size), median);
  }
  return out;
}

std::string format_csv(const ResultTable& table) {
  std::string out(kHeader);
  out += '\n';
  for (const auto& r : table.rows()) {
    out += r.experiment + ',' + std::to_string(r.seed) + ',' + std::to_string(r.N) + ',' +
           std::to_string(r.n) + ',' + std::to_string(r.m) + ',' + format_number(r.eps) + ',' +
           r.estimator + ',' + r.metric + ',' + format_number(r.value) + '\n';
  }
  return out;
}

ResultTable parse_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  require(std::getline(in, line) && line == kHeader, ErrorKind::InvalidInput,
          "csv: missing or unexpected header");
  ResultTable table;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) fields.push_back(cell);
    require(fields.size() == 9, ErrorKind::InvalidInput,
            "csv line " + std::to_string(number) + ": expected 9 fields");
    table.add({fields[0], parse_integer<std::uint64_t>(fields[1], number),
               parse_integer<int>(fields[2], number), parse_integer<int>(fields[3], number),
               parse_integer<int>(fields[4], number), parse_number(fields[5], number), fields[6],
               fields[7], parse_number(fields[8], number)});
  }
  return table;
}

void emit_csv(const ResultTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << format_csv(table);
  out.flush();
  require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

ResultTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_csv(text.str());
}

void emit_timing_csv(const std::vector<TrialTiming>& timings, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << "experiment,N,seed,seconds\n";
  for (const auto& t : timings) {
    out << t.experiment << ',' << t.N << ',' << t.seed << ',' << format_number(t.seconds) << '\n';
  }
  out.flush();
  require(out.good(), ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace latent_ot
