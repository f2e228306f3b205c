#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace lorot {

/// Extended real number on [-inf, +inf].
///
/// Infinities are carried as a tag, never as a floating sentinel inside
/// arithmetic. Addition follows the transport conventions used throughout
/// the library: `inf - inf := -inf`, so a single `-inf` summand always wins.
class ExtReal {
 public:
  enum class Kind : std::uint8_t { finite, pos_inf, neg_inf };

  constexpr ExtReal() = default;
  constexpr ExtReal(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtReal pos_infinity() { return ExtReal(Kind::pos_inf); }
  static constexpr ExtReal neg_infinity() { return ExtReal(Kind::neg_inf); }

  /// Maps IEEE infinities onto the tagged representation; rejects NaN.
  static ExtReal from_double(double v) {
    if (std::isnan(v)) throw std::domain_error("ExtReal: NaN is not an extended real");
    if (std::isinf(v)) return v > 0 ? pos_infinity() : neg_infinity();
    return ExtReal(v);
  }

  [[nodiscard]] constexpr Kind kind() const { return kind_; }
  [[nodiscard]] constexpr bool is_finite() const { return kind_ == Kind::finite; }
  [[nodiscard]] constexpr bool is_pos_inf() const { return kind_ == Kind::pos_inf; }
  [[nodiscard]] constexpr bool is_neg_inf() const { return kind_ == Kind::neg_inf; }

  /// Finite payload; throws when called on an infinity.
  [[nodiscard]] double value() const {
    if (kind_ != Kind::finite) throw std::domain_error("ExtReal::value() on an infinite value");
    return value_;
  }

  /// Lossy conversion for output only.
  [[nodiscard]] double to_double() const {
    switch (kind_) {
      case Kind::pos_inf: return std::numeric_limits<double>::infinity();
      case Kind::neg_inf: return -std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  [[nodiscard]] std::string to_string() const {
    switch (kind_) {
      case Kind::pos_inf: return "inf";
      case Kind::neg_inf: return "-inf";
      default: {
        // Shortest representation that round-trips.
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, value_);
        return std::string(buf, res.ptr);
      }
    }
  }

  friend ExtReal operator-(ExtReal a) {
    switch (a.kind_) {
      case Kind::pos_inf: return neg_infinity();
      case Kind::neg_inf: return pos_infinity();
      default: return ExtReal(-a.value_);
    }
  }

  friend ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.is_neg_inf() || b.is_neg_inf()) return neg_infinity();
    if (a.is_pos_inf() || b.is_pos_inf()) return pos_infinity();
    return ExtReal(a.value_ + b.value_);
  }

  friend ExtReal operator-(ExtReal a, ExtReal b) { return a + (-b); }

  /// Multiplication by a nonnegative finite scalar with `0 * inf := 0`.
  [[nodiscard]] ExtReal scaled(double c) const {
    if (c < 0 || !std::isfinite(c)) throw std::domain_error("ExtReal::scaled needs a finite c >= 0");
    if (kind_ == Kind::finite) return ExtReal(c * value_);
    return c == 0.0 ? ExtReal(0.0) : *this;
  }

  friend bool operator==(ExtReal a, ExtReal b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::finite || a.value_ == b.value_);
  }
  friend bool operator<(ExtReal a, ExtReal b) {
    if (a.kind_ == b.kind_) return a.kind_ == Kind::finite && a.value_ < b.value_;
    if (a.is_neg_inf()) return true;
    if (b.is_pos_inf()) return true;
    return false;
  }
  friend bool operator>(ExtReal a, ExtReal b) { return b < a; }
  friend bool operator<=(ExtReal a, ExtReal b) { return !(b < a); }
  friend bool operator>=(ExtReal a, ExtReal b) { return !(a < b); }

  friend std::ostream& operator<<(std::ostream& os, ExtReal x) { return os << x.to_string(); }

 private:
  constexpr explicit ExtReal(Kind k) : kind_(k) {}

  Kind kind_ = Kind::finite;
  double value_ = 0.0;
};

inline ExtReal min(ExtReal a, ExtReal b) { return b < a ? b : a; }
inline ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }

}  // namespace lorot
