#include "fleethealth/date.hpp"

#include <charconv>
#include <cstdio>

#include "fleethealth/errors.hpp"

namespace fleethealth {

namespace {

template <typename T>
bool parse_field(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
  std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                  std::chrono::day{day}};
  if (!ymd.ok()) throw Error("invalid calendar date");
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw Error("malformed date '" + std::string(iso) + "', expected YYYY-MM-DD");
  }
  int y = 0;
  unsigned m = 0, d = 0;
  if (!parse_field(iso.substr(0, 4), y) || !parse_field(iso.substr(5, 2), m) ||
      !parse_field(iso.substr(8, 2), d)) {
    throw Error("malformed date '" + std::string(iso) + "'");
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) throw Error("invalid calendar date '" + std::string(iso) + "'");
  return Date(std::chrono::sys_days{ymd});
}

std::string Date::iso() const {
  std::chrono::year_month_day ymd{days_};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace fleethealth
