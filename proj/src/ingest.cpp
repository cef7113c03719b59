#include "extremes/ingest.hpp"

#include "extremes/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace extremes {

Calendar::Calendar(const MonthLengths& lengths)
    : lengths_(lengths), days_per_year_(std::accumulate(lengths.begin(), lengths.end(), 0)) {}

Calendar Calendar::noleap() {
  return Calendar({31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31});
}

Calendar Calendar::from_month_lengths(const MonthLengths& lengths) {
  for (int len : lengths)
    if (len < 28 || len > 31)
      throw std::invalid_argument("calendar month lengths must lie in 28..31");
  return Calendar(lengths);
}

int Calendar::month_of_day(std::size_t day) const {
  if (day < 1) throw std::out_of_range("day indices are 1-based");
  auto offset = static_cast<int>((day - 1) % static_cast<std::size_t>(days_per_year_));
  for (int m = 0; m < 12; ++m) {
    if (offset < lengths_[m]) return m + 1;
    offset -= lengths_[m];
  }
  return 12;  // unreachable: offset < days_per_year
}

std::vector<std::uint8_t> Calendar::fold(std::size_t n_days) const {
  std::vector<std::uint8_t> months;
  months.reserve(n_days);
  std::size_t day = 0;
  while (months.size() < n_days) {
    for (int m = 0; m < 12 && months.size() < n_days; ++m)
      for (int d = 0; d < lengths_[m] && months.size() < n_days; ++d, ++day)
        months.push_back(static_cast<std::uint8_t>(m + 1));
  }
  return months;
}

EnsembleRun::EnsembleRun(int run_id, std::size_t n_sites, std::vector<double> values,
                         const Calendar& calendar)
    : run_id_(run_id), n_days_(0), n_sites_(n_sites), values_(std::move(values)),
      calendar_(calendar) {
  if (run_id < 1) throw std::invalid_argument("run_id must be >= 1");
  if (n_sites < 1) throw std::invalid_argument("a run needs at least one site");
  if (values_.size() % n_sites != 0)
    throw std::invalid_argument("value count is not a multiple of the site count");
  n_days_ = values_.size() / n_sites;
  if (n_days_ == 0) throw std::invalid_argument("a run needs at least one day");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0)
      throw std::invalid_argument("value at day " + std::to_string(i / n_sites + 1) +
                                  " must be finite and nonnegative");
    values_[i] += 0.0;  // folds -0.0 into +0.0
  }
  months_ = calendar_.fold(n_days_);
}

std::span<const double> EnsembleRun::day(std::size_t day) const {
  if (day < 1 || day > n_days_) throw std::out_of_range("day index out of range");
  return std::span<const double>(values_).subspan((day - 1) * n_sites_, n_sites_);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parse_field(std::string_view field, std::size_t line) {
  field = trim(field);
  if (field.empty()) throw ParseError(line, "empty field");
  if (field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw ParseError(line, "not a number: '" + std::string(field) + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite value");
  if (v < 0.0) throw ParseError(line, "negative value " + std::string(field));
  return v;
}

} // namespace

EnsembleRun parse_run(std::istream& in, int run_id, const Calendar& calendar,
                      const LoadOptions& options) {
  std::vector<double> values;
  std::size_t n_sites = 0;
  std::string text;
  std::size_t line = 0;
  if (options.header) {
    std::getline(in, text);
    ++line;
  }
  while (std::getline(in, text)) {
    ++line;
    std::string_view row = trim(text);
    if (row.empty()) continue;
    std::size_t cols = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = row.find(',', start);
      values.push_back(parse_field(row.substr(start, comma - start), line));
      ++cols;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (n_sites == 0)
      n_sites = cols;
    else if (cols != n_sites)
      throw ParseError(line, "expected " + std::to_string(n_sites) + " columns, found " +
                                 std::to_string(cols));
  }
  if (values.empty()) throw InputError("run " + std::to_string(run_id) + ": no data rows");
  return EnsembleRun(run_id, n_sites, std::move(values), calendar);
}

EnsembleRun load_run(const std::filesystem::path& path, int run_id,
                     const Calendar& calendar, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open run file: " + path.string());
  try {
    return parse_run(in, run_id, calendar, options);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.detail(), path.string());
  }
}

void write_run(const EnsembleRun& run, std::ostream& out) {
  char buf[32];
  for (std::size_t d = 1; d <= run.n_days(); ++d) {
    auto row = run.day(d);
    for (std::size_t s = 0; s < row.size(); ++s) {
      if (s) out << ',';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, row[s]);
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

void validate_ensemble(std::span<const EnsembleRun> runs) {
  if (runs.empty()) throw InputError("ensemble is empty");
  const auto& ref = runs.front();
  for (const auto& run : runs) {
    if (run.n_days() != ref.n_days() || run.n_sites() != ref.n_sites() ||
        !(run.calendar() == ref.calendar()))
      throw InputError("run " + std::to_string(run.run_id()) + " has shape " +
                       std::to_string(run.n_days()) + "x" + std::to_string(run.n_sites()) +
                       ", expected " + std::to_string(ref.n_days()) + "x" +
                       std::to_string(ref.n_sites()) + " with a shared calendar");
  }
}

} // namespace extremes
