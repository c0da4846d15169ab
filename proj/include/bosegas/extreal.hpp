#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bosegas {

// Extended real number: finite value, +infinity, or undefined.
// Quantities that can genuinely be infinite (rate functions, divergent
// densities) or undefined (one-sided derivatives at a kink) are returned
// through this type rather than as bare sentinel floats.
class ExtReal {
 public:
  enum class Kind { Finite, PosInf, Undefined };

  ExtReal() = default;
  static ExtReal finite(double v) { return ExtReal(Kind::Finite, v); }
  static ExtReal inf() { return ExtReal(Kind::PosInf, 0.0); }
  static ExtReal undefined() { return ExtReal(Kind::Undefined, 0.0); }

  // Maps an IEEE double onto the channel: +inf becomes PosInf, NaN Undefined.
  static ExtReal from_double(double v) {
    if (std::isnan(v)) return undefined();
    if (std::isinf(v) && v > 0) return inf();
    return finite(v);
  }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_inf() const { return kind_ == Kind::PosInf; }
  bool is_undefined() const { return kind_ == Kind::Undefined; }

  double value() const {
    if (kind_ != Kind::Finite)
      throw std::logic_error("ExtReal::value on non-finite value");
    return value_;
  }
  double value_or(double fallback) const {
    return kind_ == Kind::Finite ? value_ : fallback;
  }
  // Collapses back to IEEE semantics where convenient for arithmetic.
  double as_double() const {
    if (kind_ == Kind::PosInf) return std::numeric_limits<double>::infinity();
    if (kind_ == Kind::Undefined)
      return std::numeric_limits<double>::quiet_NaN();
    return value_;
  }

  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ != Kind::Finite || a.value_ == b.value_;
  }

 private:
  ExtReal(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_ = Kind::Finite;
  double value_ = 0.0;
};

}  // namespace bosegas
