#pragma once

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>

#include "koq/dimension.hpp"
#include "koq/koq_engine.hpp"
#include "koq/unit_registry.hpp"

namespace koq {

struct QuantityError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteValue : public QuantityError {
  using QuantityError::QuantityError;
};

struct DivideByZero : public QuantityError {
  DivideByZero() : QuantityError("division by zero") {}
};

struct ZeroToNegativePower : public QuantityError {
  ZeroToNegativePower() : QuantityError("zero raised to a negative power") {}
};

// Addition or subtraction across different dimensions.
struct Type1UnitError : public QuantityError {
  Type1UnitError(const UnitExpr& left, const UnitExpr& right)
      : Type1UnitError(ConversionError(left.display(), left.dimension().bracketed(),
                                       right.display(), right.dimension().bracketed())) {}
  explicit Type1UnitError(const ConversionError& e)
      : QuantityError(e.what()),
        left_unit(e.from_unit),
        left_dimension(e.from_dimension),
        right_unit(e.to_unit),
        right_dimension(e.to_dimension) {}
  std::string left_unit;
  std::string left_dimension;
  std::string right_unit;
  std::string right_dimension;
};

// Shortest decimal form that parses back to the same double.
inline std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

class Quantity {
 public:
  Quantity(double value, UnitExpr unit, KoqSignature koq = {})
      : value_(value), unit_(std::move(unit)), koq_(std::move(koq)) {
    if (!std::isfinite(value_)) {
      throw NonFiniteValue("quantity value must be finite");
    }
  }

  static Quantity scalar(double value, AngleMode mode = AngleMode::kStandard) {
    return Quantity(value, UnitExpr::dimensionless(mode));
  }

  double value() const { return value_; }
  const UnitExpr& unit() const { return unit_; }
  const DimensionVector& dimension() const { return unit_.dimension(); }
  const KoqSignature& koq() const { return koq_; }

  // Dimensionless and untagged: contributes nothing to a signature.
  bool scalar_transparent() const { return unit_.dimension().dimensionless() && koq_.empty(); }

  Quantity with_koq(KoqSignature sig) const { return Quantity(value_, unit_, std::move(sig)); }
  Quantity with_value(double v) const { return Quantity(v, unit_, koq_); }

  std::string str() const {
    const std::string u = unit_.display();
    return u.empty() ? format_real(value_) : format_real(value_) + " " + u;
  }

 private:
  double value_;
  UnitExpr unit_;
  KoqSignature koq_;
};

struct AddPolicy {
  bool strict_untagged = false;
};

// a + sign*b in a's unit. Unit compatibility is checked before kinds.
inline Quantity q_add(const Quantity& a, const Quantity& b, int sign, AddPolicy policy = {},
                      bool* untagged_operand = nullptr) {
  if (!dim_eq(a.dimension(), b.dimension())) throw Type1UnitError(a.unit(), b.unit());
  const double cf = conversion_factor(b.unit(), a.unit());
  const AddOutcome koq = check_add(a.koq(), b.koq(), policy.strict_untagged);
  if (untagged_operand != nullptr) *untagged_operand = koq.untagged_operand;
  const double v = a.value() + sign * b.value() * cf;
  if (!std::isfinite(v)) throw NonFiniteValue("addition overflowed");
  return Quantity(v, a.unit(), koq.signature);
}

inline Quantity q_mul(const Quantity& a, const Quantity& b, MulOp op) {
  if (op == MulOp::kDiv && b.value() == 0.0) throw DivideByZero();
  const int sign = op == MulOp::kMul ? 1 : -1;
  UnitExpr unit = UnitExpr::combine(a.unit(), b.unit(), sign);
  const double v = op == MulOp::kMul ? a.value() * b.value() : a.value() / b.value();
  if (!std::isfinite(v)) throw NonFiniteValue("product overflowed");
  return Quantity(v, std::move(unit), combine_mul(a.koq(), b.koq(), op));
}

inline Quantity q_pow(const Quantity& a, int n) {
  if (n == 0) return Quantity::scalar(1.0, a.dimension().mode());
  if (n < 0 && a.value() == 0.0) throw ZeroToNegativePower();
  UnitExpr unit = a.unit().pow(n);
  const double v = std::pow(a.value(), n);
  if (!std::isfinite(v)) throw NonFiniteValue("power overflowed");
  return Quantity(v, std::move(unit), a.koq().pow(n));
}

// Re-expresses `a` in `target`; the kind is never altered.
inline Quantity q_convert(const Quantity& a, const UnitExpr& target) {
  const double v = a.value() * conversion_factor(a.unit(), target);
  return Quantity(v, target, a.koq());
}

inline Quantity operator+(const Quantity& a, const Quantity& b) { return q_add(a, b, 1); }
inline Quantity operator-(const Quantity& a, const Quantity& b) { return q_add(a, b, -1); }
inline Quantity operator*(const Quantity& a, const Quantity& b) {
  return q_mul(a, b, MulOp::kMul);
}
inline Quantity operator/(const Quantity& a, const Quantity& b) {
  return q_mul(a, b, MulOp::kDiv);
}

}  // namespace koq
