#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "sfisep/errors.hpp"

namespace sfisep {

// Exact ratio of two positive integers. Frame durations and resampling ratios
// are kept rational so repeated rate conversions cannot drift.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    require(d > 0, ErrorCode::invalid_argument, "rational denominator must be positive");
    require(n >= 0, ErrorCode::invalid_argument, "rational numerator must be non-negative");
    reduce();
  }

  void reduce() {
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  bool operator==(const Rational& other) const = default;

  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

}  // namespace sfisep
