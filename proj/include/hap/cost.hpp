#pragma once

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace boost {

inline bool operator==(const rational<long long>& a, long long b) { return a.denominator() == 1 && a.numerator() == b; }
inline bool operator==(const rational<long long>& a, int b) { return a == static_cast<long long>(b); }

}  // namespace boost

namespace hap {

using Rational = boost::rational<long long>;

inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

// Accepts "3", "-2", "3/2" and plain decimals such as "0.25".
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    long long n = std::stoll(text.substr(0, slash));
    long long d = std::stoll(text.substr(slash + 1));
    if (d == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
    return Rational(n, d);
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) {
    size_t used = 0;
    long long n = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument("bad rational '" + text + "'");
    return Rational(n);
  }
  std::string whole = text.substr(0, dot);
  std::string frac = text.substr(dot + 1);
  if (frac.size() > 12) throw std::invalid_argument("too many decimals in '" + text + "'");
  bool neg = !whole.empty() && whole[0] == '-';
  long long den = 1;
  for (size_t i = 0; i < frac.size(); ++i) den *= 10;
  long long w = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
  long long f = frac.empty() ? 0 : std::stoll(frac);
  long long num = std::llabs(w) * den + f;
  return Rational(neg ? -num : num, den);
}

inline Rational rational_from_double(double x, long long den = 1000000) {
  return Rational(static_cast<long long>(std::llround(x * static_cast<double>(den))), den);
}

// A plan cost: an exact rational or +infinity (the cost of an inexecutable plan).
class Cost {
 public:
  Cost() = default;
  Cost(Rational v) : value_(v) {}
  Cost(long long v) : value_(v) {}
  Cost(int v) : value_(v) {}

  static Cost infinity() {
    Cost c;
    c.inf_ = true;
    return c;
  }

  bool finite() const { return !inf_; }
  bool is_inf() const { return inf_; }

  const Rational& value() const {
    if (inf_) throw std::logic_error("value() of infinite cost");
    return value_;
  }

  double to_double() const { return inf_ ? INFINITY : hap::to_double(value_); }

  std::string str() const { return inf_ ? std::string("inf") : hap::to_string(value_); }

  Cost& operator+=(const Cost& o) {
    if (inf_ || o.inf_) {
      inf_ = true;
      value_ = 0;
    } else {
      value_ += o.value_;
    }
    return *this;
  }

  friend Cost operator+(Cost a, const Cost& b) { return a += b; }

  friend bool operator==(const Cost& a, const Cost& b) {
    if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
    return a.value_ == b.value_;
  }
  friend bool operator!=(const Cost& a, const Cost& b) { return !(a == b); }
  friend bool operator<(const Cost& a, const Cost& b) {
    if (a.inf_) return false;
    if (b.inf_) return true;
    return a.value_ < b.value_;
  }
  friend bool operator>(const Cost& a, const Cost& b) { return b < a; }
  friend bool operator<=(const Cost& a, const Cost& b) { return !(b < a); }
  friend bool operator>=(const Cost& a, const Cost& b) { return !(a < b); }

  friend std::ostream& operator<<(std::ostream& os, const Cost& c) { return os << c.str(); }

 private:
  bool inf_ = false;
  Rational value_{0};
};

// |a - b| with +inf when either side is infinite (and 0 when both are).
inline Cost abs_difference(const Cost& a, const Cost& b) {
  if (a.is_inf() && b.is_inf()) return Cost(0);
  if (a.is_inf() || b.is_inf()) return Cost::infinity();
  Rational d = a.value() - b.value();
  return Cost(d < 0 ? -d : d);
}

}  // namespace hap
