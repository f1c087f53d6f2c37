#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "lapgraph/errors.hpp"

namespace lapgraph {

/// Parses YYYY-MM-DD; returns false for anything else, including impossible dates.
inline bool parse_iso_date(const std::string& s, std::chrono::year_month_day& out) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9') return false;
  const int y = std::stoi(s.substr(0, 4));
  const unsigned m = static_cast<unsigned>(std::stoi(s.substr(5, 2)));
  const unsigned d = static_cast<unsigned>(std::stoi(s.substr(8, 2)));
  out = std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  return out.ok();
}

inline bool is_iso_date(const std::string& s) {
  std::chrono::year_month_day ymd;
  return parse_iso_date(s, ymd);
}

inline std::string format_iso_date(const std::chrono::year_month_day& ymd) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// n consecutive weekdays starting at (or after) `start`.
inline std::vector<std::string> business_days(const std::string& start, std::size_t n) {
  std::chrono::year_month_day ymd;
  if (!parse_iso_date(start, ymd)) throw ValidationError("business_days: bad start date " + start);
  std::chrono::sys_days day{ymd};
  std::vector<std::string> out;
  out.reserve(n);
  while (out.size() < n) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday)
      out.push_back(format_iso_date(std::chrono::year_month_day{day}));
    day += std::chrono::days{1};
  }
  return out;
}

/// The last weekday strictly before `date`.
inline std::string previous_business_day(const std::string& date) {
  std::chrono::year_month_day ymd;
  if (!parse_iso_date(date, ymd)) throw ValidationError("previous_business_day: bad date " + date);
  std::chrono::sys_days day{ymd};
  do {
    day -= std::chrono::days{1};
  } while (std::chrono::weekday{day} == std::chrono::Saturday || std::chrono::weekday{day} == std::chrono::Sunday);
  return format_iso_date(std::chrono::year_month_day{day});
}

}  // namespace lapgraph
