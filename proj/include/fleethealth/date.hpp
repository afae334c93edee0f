#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace fleethealth {

// Calendar date with day resolution. Arithmetic is in whole days.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  // Parses YYYY-MM-DD; throws fleethealth::Error on malformed or invalid dates.
  static Date parse(std::string_view iso);

  std::string iso() const;
  constexpr std::chrono::sys_days sys() const { return days_; }
  constexpr long long serial() const { return days_.time_since_epoch().count(); }

  constexpr Date operator+(std::chrono::days d) const { return Date(days_ + d); }
  constexpr Date operator-(std::chrono::days d) const { return Date(days_ - d); }
  constexpr std::chrono::days operator-(Date other) const { return days_ - other.days_; }

  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace fleethealth
