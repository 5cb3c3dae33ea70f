#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace koq {

struct DimensionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an exponent would leave [kMinExponent, kMaxExponent].
struct ExponentOverflow : public DimensionError {
  using DimensionError::DimensionError;
};

// Raised when a standard (7-slot) vector meets a strict-angle (8-slot) one.
struct ArityMismatch : public DimensionError {
  using DimensionError::DimensionError;
};

enum class AngleMode : std::uint8_t { kStandard, kStrict };

enum BaseQuantity : std::uint8_t {
  kLength,
  kMass,
  kTime,
  kCurrent,
  kTemperature,
  kAmount,
  kLuminosity,
  kAngle,
};

inline constexpr std::size_t kStandardArity = 7;
inline constexpr std::size_t kStrictArity = 8;
inline constexpr int kMinExponent = -32;
inline constexpr int kMaxExponent = 32;

inline constexpr std::array<std::string_view, kStrictArity> kBaseSymbols = {
    "L", "M", "T", "I", "Θ", "N", "J", "A"};
inline constexpr std::array<std::string_view, kStrictArity> kBaseNames = {
    "length",      "mass",      "time",       "current",
    "temperature", "substance", "luminosity", "angle"};

inline constexpr std::size_t arity_of(AngleMode mode) {
  return mode == AngleMode::kStrict ? kStrictArity : kStandardArity;
}

// Integer exponents over (L, M, T, I, Θ, N, J[, A]). The angle slot only
// exists for strict-angle vectors, and the two arities never mix.
class DimensionVector {
 public:
  using Exponents = std::array<int, kStrictArity>;

  constexpr DimensionVector() = default;
  constexpr explicit DimensionVector(AngleMode mode) : mode_(mode) {}

  static DimensionVector base(BaseQuantity q, AngleMode mode = AngleMode::kStandard) {
    DimensionVector d(mode);
    if (static_cast<std::size_t>(q) >= d.arity()) {
      throw ArityMismatch("angle base quantity requires strict-angle mode");
    }
    d.exps_[q] = 1;
    return d;
  }

  // Builds from explicit exponents; throws ExponentOverflow if any is out of range.
  static DimensionVector from_exponents(const Exponents& e,
                                        AngleMode mode = AngleMode::kStandard) {
    DimensionVector d(mode);
    for (std::size_t i = 0; i < kStrictArity; ++i) {
      if (i >= d.arity() && e[i] != 0) {
        throw ArityMismatch("angle exponent requires strict-angle mode");
      }
      d.exps_[i] = checked(e[i]);
    }
    return d;
  }

  constexpr AngleMode mode() const { return mode_; }
  constexpr std::size_t arity() const { return arity_of(mode_); }
  constexpr int operator[](std::size_t i) const { return exps_[i]; }
  constexpr const Exponents& exponents() const { return exps_; }

  constexpr bool dimensionless() const {
    for (int e : exps_) {
      if (e != 0) return false;
    }
    return true;
  }

  // Equality is only defined between vectors of the same arity.
  friend bool dim_eq(const DimensionVector& a, const DimensionVector& b) {
    require_same_arity(a, b);
    return a.exps_ == b.exps_;
  }

  friend DimensionVector dim_mul(const DimensionVector& a, const DimensionVector& b) {
    require_same_arity(a, b);
    DimensionVector r(a.mode_);
    for (std::size_t i = 0; i < kStrictArity; ++i) {
      r.exps_[i] = checked(a.exps_[i] + b.exps_[i]);
    }
    return r;
  }

  friend DimensionVector dim_div(const DimensionVector& a, const DimensionVector& b) {
    return dim_mul(a, dim_pow(b, -1));
  }

  friend DimensionVector dim_pow(const DimensionVector& a, int n) {
    DimensionVector r(a.mode_);
    for (std::size_t i = 0; i < kStrictArity; ++i) {
      r.exps_[i] = checked(static_cast<long long>(a.exps_[i]) * n);
    }
    return r;
  }

  friend bool operator==(const DimensionVector&, const DimensionVector&) = default;

  // "L M T^-2" style; "1" when dimensionless.
  std::string symbolic() const {
    std::string out;
    for (std::size_t i = 0; i < arity(); ++i) {
      if (exps_[i] == 0) continue;
      if (!out.empty()) out += ' ';
      out += kBaseSymbols[i];
      if (exps_[i] != 1) {
        out += '^';
        out += std::to_string(exps_[i]);
      }
    }
    return out.empty() ? "1" : out;
  }

  // "[mass]*[length]^2/[time]^2" style used in conversion diagnostics.
  std::string bracketed() const {
    std::string num;
    std::string den;
    for (std::size_t i = 0; i < arity(); ++i) {
      const int e = exps_[i];
      if (e == 0) continue;
      std::string term = "[" + std::string(kBaseNames[i]) + "]";
      const int mag = e < 0 ? -e : e;
      if (mag != 1) term += "^" + std::to_string(mag);
      if (e > 0) {
        if (!num.empty()) num += '*';
        num += term;
      } else {
        den += '/';
        den += term;
      }
    }
    if (num.empty() && den.empty()) return "1";
    if (num.empty()) num = "1";
    return num + den;
  }

 private:
  static int checked(long long v) {
    if (v < kMinExponent || v > kMaxExponent) {
      throw ExponentOverflow("dimension exponent " + std::to_string(v) +
                             " outside [-32, 32]");
    }
    return static_cast<int>(v);
  }

  static void require_same_arity(const DimensionVector& a, const DimensionVector& b) {
    if (a.mode_ != b.mode_) {
      throw ArityMismatch(
          "cannot combine standard and strict-angle dimension vectors");
    }
  }

  Exponents exps_{};
  AngleMode mode_ = AngleMode::kStandard;
};

}  // namespace koq
