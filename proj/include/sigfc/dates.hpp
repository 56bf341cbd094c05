#pragma once

// ISO-8601 calendar dates (YYYY-MM-DD) on top of std::chrono.

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace sigfc::dates {

using Day = std::chrono::sys_days;

enum class Frequency { none, daily, weekly, monthly };

inline std::optional<Frequency> parse_frequency(std::string_view s) {
  if (s == "none") return Frequency::none;
  if (s == "daily") return Frequency::daily;
  if (s == "weekly") return Frequency::weekly;
  if (s == "monthly") return Frequency::monthly;
  return std::nullopt;
}

inline const char* to_string(Frequency f) {
  switch (f) {
    case Frequency::none: return "none";
    case Frequency::daily: return "daily";
    case Frequency::weekly: return "weekly";
    case Frequency::monthly: return "monthly";
  }
  return "none";
}

inline std::optional<Day> parse(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  auto y = digits(0, 4);
  auto m = digits(5, 2);
  auto d = digits(8, 2);
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Day{ymd};
}

inline std::string format(Day day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// "YYYY-MM" key of an ISO date string (its first seven characters).
inline std::string month_key(std::string_view iso) { return std::string(iso.substr(0, 7)); }

/// Whether `next` is exactly one period after `prev`. Monthly series need one
/// observation per calendar month; the day of month is free.
inline bool is_next(Day prev, Day next, Frequency f) {
  using namespace std::chrono;
  switch (f) {
    case Frequency::none: return next > prev;
    case Frequency::daily: return next - prev == days{1};
    case Frequency::weekly: return next - prev == days{7};
    case Frequency::monthly: {
      const year_month_day a{prev};
      const year_month_day b{next};
      return year_month{a.year(), a.month()} + months{1} == year_month{b.year(), b.month()};
    }
  }
  return false;
}

}  // namespace sigfc::dates
