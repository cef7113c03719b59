#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace extremes {

/// Repeating month pattern folded over 1-based day indices. The last year is
/// truncated when the series length is not a whole number of years.
class Calendar {
public:
  using MonthLengths = std::array<int, 12>;

  /// 365-day calendar without leap days.
  static Calendar noleap();
  /// Throws std::invalid_argument unless every length lies in 28..31.
  static Calendar from_month_lengths(const MonthLengths& lengths);

  const MonthLengths& month_lengths() const noexcept { return lengths_; }
  int days_per_year() const noexcept { return days_per_year_; }

  /// Month (1..12) of 1-based day index `day`.
  int month_of_day(std::size_t day) const;
  /// Months of days 1..n_days.
  std::vector<std::uint8_t> fold(std::size_t n_days) const;

  bool operator==(const Calendar&) const = default;

private:
  explicit Calendar(const MonthLengths& lengths);
  MonthLengths lengths_;
  int days_per_year_;
};

/// One climate run: an N x S matrix of daily site values plus day->month map.
/// Immutable once built; construction validates every value.
class EnsembleRun {
public:
  EnsembleRun(int run_id, std::size_t n_sites, std::vector<double> values,
              const Calendar& calendar);

  int run_id() const noexcept { return run_id_; }
  std::size_t n_days() const noexcept { return n_days_; }
  std::size_t n_sites() const noexcept { return n_sites_; }
  const Calendar& calendar() const noexcept { return calendar_; }

  /// Row-major values, day-major.
  std::span<const double> values() const noexcept { return values_; }
  /// Site values of 1-based day `day`.
  std::span<const double> day(std::size_t day) const;
  std::span<const std::uint8_t> months() const noexcept { return months_; }

private:
  int run_id_;
  std::size_t n_days_;
  std::size_t n_sites_;
  std::vector<double> values_;
  Calendar calendar_;
  std::vector<std::uint8_t> months_;
};

struct LoadOptions {
  bool header = false;  // skip the first line
};

/// Parses the CSV layout: one row per day, one numeric column per site.
/// Throws ParseError naming the offending line for malformed rows, column
/// count mismatches, negative values and non-finite values.
EnsembleRun parse_run(std::istream& in, int run_id, const Calendar& calendar,
                      const LoadOptions& options = {});

/// Throws InputError if the file cannot be opened.
EnsembleRun load_run(const std::filesystem::path& path, int run_id,
                     const Calendar& calendar, const LoadOptions& options = {});

/// Writes values in the same layout parse_run reads, with round-trip precision.
void write_run(const EnsembleRun& run, std::ostream& out);

/// All runs must share N, S and calendar. Throws InputError naming the first
/// mismatching run_id, or for an empty list.
void validate_ensemble(std::span<const EnsembleRun> runs);

} // namespace extremes
