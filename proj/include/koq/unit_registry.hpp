#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "koq/dimension.hpp"

namespace koq {

struct Prefix {
  std::string symbol;
  double factor = 1.0;
};

struct UnitDef {
  std::string name;
  std::vector<std::string> aliases;
  double factor = 1.0;  // multiplier to coherent base units
  DimensionVector dimension;
  bool prefixable = true;
};

// One factor of a unit expression as written, e.g. "km" with exponent -1.
// `factor` is the combined prefix * unit factor for a single power.
struct UnitTerm {
  std::string symbol;
  int exponent = 1;
  double factor = 1.0;

  friend bool operator==(const UnitTerm&, const UnitTerm&) = default;
};

class UnitExpr {
 public:
  UnitExpr() = default;
  explicit UnitExpr(AngleMode mode) : dimension_(mode) {}
  UnitExpr(DimensionVector dim, double factor, std::vector<UnitTerm> terms)
      : dimension_(dim), factor_(factor), terms_(std::move(terms)) {}

  static UnitExpr dimensionless(AngleMode mode = AngleMode::kStandard) {
    return UnitExpr(mode);
  }

  const DimensionVector& dimension() const { return dimension_; }
  double factor() const { return factor_; }
  const std::vector<UnitTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  // Product (exponent_sign = +1) or quotient (-1). Terms with the same
  // symbol merge; nothing is rewritten into derived units.
  static UnitExpr combine(const UnitExpr& a, const UnitExpr& b, int exponent_sign) {
    UnitExpr r(dim_mul(a.dimension_, dim_pow(b.dimension_, exponent_sign)),
               exponent_sign > 0 ? a.factor_ * b.factor_ : a.factor_ / b.factor_,
               a.terms_);
    for (const UnitTerm& t : b.terms_) r.add_term(t.symbol, t.exponent * exponent_sign, t.factor);
    return r;
  }

  UnitExpr pow(int n) const {
    UnitExpr r(dim_pow(dimension_, n), std::pow(factor_, n), {});
    if (n != 0) {
      for (const UnitTerm& t : terms_) r.add_term(t.symbol, t.exponent * n, t.factor);
    }
    return r;
  }

  // Appends a term, merging with an existing one of the same symbol.
  // Does not touch dimension_ or factor_.
  void add_term(const std::string& symbol, int exponent, double factor) {
    auto it = std::find_if(terms_.begin(), terms_.end(),
                           [&](const UnitTerm& t) { return t.symbol == symbol; });
    if (it == terms_.end()) {
      if (exponent != 0) terms_.push_back({symbol, exponent, factor});
      return;
    }
    it->exponent += exponent;
    if (it->exponent == 0) terms_.erase(it);
  }

  // "kg*m^2/s^3"; "1/s" when only divisors; "" when dimensionless and bare.
  std::string display() const {
    std::string num;
    std::string den;
    for (const UnitTerm& t : terms_) {
      const int mag = t.exponent < 0 ? -t.exponent : t.exponent;
      std::string term = t.symbol;
      if (mag != 1) term += "^" + std::to_string(mag);
      if (t.exponent > 0) {
        if (!num.empty()) num += '*';
        num += term;
      } else {
        den += '/';
        den += term;
      }
    }
    if (num.empty() && !den.empty()) num = "1";
    return num + den;
  }

 private:
  DimensionVector dimension_;
  double factor_ = 1.0;
  std::vector<UnitTerm> terms_;
};

struct UnitParseError : public std::runtime_error {
  enum class Kind { kUnknownUnit, kUnknownPrefix, kMalformed };
  UnitParseError(Kind k, std::size_t off, std::size_t len, const std::string& msg)
      : std::runtime_error(msg), kind(k), offset(off), length(len) {}
  Kind kind;
  std::size_t offset;  // byte offset into the parsed text
  std::size_t length;
};

struct DefinitionError : public std::runtime_error {
  enum class Kind {
    kDuplicateName,
    kUnknownReferencedUnit,
    kNonpositiveFactor,
    kMalformedLine,
    kUnsupported,
  };
  DefinitionError(Kind k, int ln, const std::string& msg)
      : std::runtime_error("line " + std::to_string(ln) + ": " + msg), kind(k), line(ln) {}
  Kind kind;
  int line;
};

struct ConversionError : public std::runtime_error {
  ConversionError(std::string from_u, std::string from_d, std::string to_u, std::string to_d)
      : std::runtime_error("Cannot convert from '" + from_u + "' (" + from_d + ") to '" + to_u +
                           "' (" + to_d + ")"),
        from_unit(std::move(from_u)),
        from_dimension(std::move(from_d)),
        to_unit(std::move(to_u)),
        to_dimension(std::move(to_d)) {}
  std::string from_unit;
  std::string from_dimension;
  std::string to_unit;
  std::string to_dimension;
};

// Multiplier taking a magnitude in `from` to the same magnitude in `to`.
inline double conversion_factor(const UnitExpr& from, const UnitExpr& to) {
  if (!dim_eq(from.dimension(), to.dimension())) {
    throw ConversionError(from.display(), from.dimension().bracketed(), to.display(),
                          to.dimension().bracketed());
  }
  return from.factor() / to.factor();
}

namespace detail {

inline bool is_name_start(unsigned char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_' || c >= 0x80;
}

inline bool is_name_char(unsigned char c) {
  return is_name_start(c) || (c >= '0' && c <= '9');
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

inline std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

class UnitRegistry {
 public:
  explicit UnitRegistry(AngleMode mode = AngleMode::kStandard) : mode_(mode) {}

  // Base SI units, common prefixes, derived and non-SI units.
  static UnitRegistry builtin(AngleMode mode = AngleMode::kStandard) {
    UnitRegistry r(mode);
    r.load(builtin_definitions(mode));
    return r;
  }

  static std::string builtin_definitions(AngleMode mode) {
    std::string text = R"(# SI base units
base L m
base M kg noprefix
base T s
base I A
base Θ K
base N mol
base J cd
prefix T 1e12
prefix G 1e9
prefix M 1e6
prefix k 1e3
prefix h 1e2
prefix da 1e1
prefix d 1e-1
prefix c 1e-2
prefix m 1e-3
prefix u 1e-6
prefix µ 1e-6
prefix n 1e-9
prefix p 1e-12
unit g 0.001 kg
unit N 1 kg*m/s^2
unit J 1 N*m
unit W 1 J/s
unit Pa 1 N/m^2
unit Hz 1 1/s
unit min 60 s noprefix
unit hr 3600 s noprefix
unit ft 0.3048 m noprefix
unit lbf 4.4482216152605 N noprefix
alias meter m
alias metre m
alias second s
alias minute min
alias hour hr
alias gram g
alias newton N
alias joule J
alias watt W
alias pascal Pa
alias hertz Hz
alias kelvin K
alias ampere A
alias mole mol
alias candela cd
)";
    if (mode == AngleMode::kStrict) {
      text += "base A rad\nunit sr 1 rad^2\n";
    } else {
      text += "unit rad 1 1\nunit sr 1 1\n";
    }
    text +=
        "unit rev 6.283185307179586 rad noprefix\n"
        "unit deg 0.017453292519943295 rad noprefix\n"
        "alias radian rad\n"
        "alias steradian sr\n";
    return text;
  }

  AngleMode mode() const { return mode_; }

  // Applies definitions on top of the current contents. All-or-nothing:
  // on error the registry is unchanged.
  void load(std::string_view text) {
    UnitRegistry next = *this;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      ++line_no;
      next.load_line(text.substr(pos, eol - pos), line_no);
      pos = eol + 1;
    }
    *this = std::move(next);
  }

  const UnitDef* find_unit(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &units_[it->second];
  }

  const Prefix* find_prefix(std::string_view symbol) const {
    auto it = prefixes_.find(std::string(symbol));
    return it == prefixes_.end() ? nullptr : &it->second;
  }

  const std::vector<UnitDef>& units() const { return units_; }
  const std::map<std::string, Prefix>& prefixes() const { return prefixes_; }

  // unitatom (("*"|"/"|".") unitatom)*, unitatom := [prefix]name ["^" int],
  // plus a bare "1" atom for forms like "1/s".
  UnitExpr parse(std::string_view text) const {
    UnitExpr out(mode_);
    DimensionVector dim(mode_);
    double factor = 1.0;
    std::size_t i = 0;
    int sign = 1;
    bool expect_atom = true;

    auto skip_ws = [&] {
      while (i < text.size() && detail::is_space(text[i])) ++i;
    };
    auto malformed = [&](std::size_t at, const std::string& msg) {
      return UnitParseError(UnitParseError::Kind::kMalformed, at,
                            at < text.size() ? 1 : 0, msg);
    };

    skip_ws();
    if (i == text.size()) throw malformed(0, "empty unit expression");
    while (true) {
      skip_ws();
      if (!expect_atom) {
        if (i == text.size()) break;
        const char c = text[i];
        if (c == '*' || c == '.') {
          sign = 1;
        } else if (c == '/') {
          sign = -1;
        } else {
          throw malformed(i, std::string("unexpected '") + c + "' in unit expression");
        }
        ++i;
        expect_atom = true;
        continue;
      }
      if (i == text.size()) throw malformed(i, "expected unit name");
      const std::size_t start = i;
      std::string_view name;
      bool unity = false;
      if (text[i] == '1' && (i + 1 == text.size() || !detail::is_name_char(text[i + 1]))) {
        unity = true;
        ++i;
      } else if (detail::is_name_start(static_cast<unsigned char>(text[i]))) {
        while (i < text.size() && detail::is_name_char(static_cast<unsigned char>(text[i]))) ++i;
        name = text.substr(start, i - start);
      } else {
        throw malformed(i, std::string("unexpected '") + text[i] + "' in unit expression");
      }
      int exponent = 1;
      skip_ws();
      if (i < text.size() && text[i] == '^') {
        ++i;
        skip_ws();
        const std::size_t num_start = i;
        if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
        int e = 0;
        const bool plus = num_start < text.size() && text[num_start] == '+';
        const char* first = text.data() + num_start + (plus ? 1 : 0);
        auto [ptr, ec] = std::from_chars(first, text.data() + i, e);
        if (ec != std::errc() || ptr != text.data() + i) {
          throw malformed(num_start, "expected integer exponent after '^'");
        }
        exponent = e;
      }
      if (!unity) {
        const auto [def, prefix_factor] = resolve(name, start);
        const double term_factor = prefix_factor * def->factor;
        const int signed_exp = sign * exponent;
        try {
          dim = dim_mul(dim, dim_pow(def->dimension, signed_exp));
        } catch (const ExponentOverflow& e) {
          throw UnitParseError(UnitParseError::Kind::kMalformed, start, i - start, e.what());
        }
        factor *= std::pow(term_factor, signed_exp);
        out.add_term(std::string(name), signed_exp, term_factor);
      }
      expect_atom = false;
    }
    return UnitExpr(dim, factor, out.terms());
  }

 private:
  struct Resolved {
    const UnitDef* def;
    double prefix_factor;
  };

  // Whole-name match wins; otherwise the longest unit name with a known prefix.
  Resolved resolve(std::string_view name, std::size_t offset) const {
    if (const UnitDef* d = find_unit(name)) return {d, 1.0};
    std::size_t longest_prefix = 0;
    for (const auto& [sym, p] : prefixes_) longest_prefix = std::max(longest_prefix, sym.size());
    bool suffix_unit_seen = false;
    for (std::size_t cut = 1; cut < name.size(); ++cut) {
      const UnitDef* d = find_unit(name.substr(cut));
      if (d == nullptr || !d->prefixable) continue;
      suffix_unit_seen = suffix_unit_seen || cut <= longest_prefix;
      if (const Prefix* p = find_prefix(name.substr(0, cut))) return {d, p->factor};
    }
    if (suffix_unit_seen) {
      throw UnitParseError(UnitParseError::Kind::kUnknownPrefix, offset, name.size(),
                           "unknown prefix in unit '" + std::string(name) + "'");
    }
    throw UnitParseError(UnitParseError::Kind::kUnknownUnit, offset, name.size(),
                         "unknown unit '" + std::string(name) + "'");
  }

  static bool valid_name(std::string_view s) {
    if (s.empty() || !detail::is_name_start(static_cast<unsigned char>(s[0]))) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return detail::is_name_char(static_cast<unsigned char>(c)); });
  }

  void claim_name(std::string_view name, int line_no) {
    if (!valid_name(name)) {
      throw DefinitionError(DefinitionError::Kind::kMalformedLine, line_no,
                            "invalid unit name '" + std::string(name) + "'");
    }
    if (index_.count(std::string(name)) != 0) {
      throw DefinitionError(DefinitionError::Kind::kDuplicateName, line_no,
                            "duplicate unit name '" + std::string(name) + "'");
    }
  }

  double parse_factor(std::string_view tok, int line_no) const {
    auto v = detail::parse_real(tok);
    if (!v) {
      throw DefinitionError(DefinitionError::Kind::kMalformedLine, line_no,
                            "invalid factor '" + std::string(tok) + "'");
    }
    if (*v <= 0.0) {
      throw DefinitionError(DefinitionError::Kind::kNonpositiveFactor, line_no,
                            "factor must be positive, got '" + std::string(tok) + "'");
    }
    return *v;
  }

  void add_unit(UnitDef def) {
    index_[def.name] = units_.size();
    units_.push_back(std::move(def));
  }

  void load_line(std::string_view raw, int line_no) {
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = detail::split_ws(line);
    if (toks.empty()) return;

    auto malformed = [&](const std::string& msg) {
      return DefinitionError(DefinitionError::Kind::kMalformedLine, line_no, msg);
    };
    bool noprefix = false;
    if (toks.size() > 1 && toks.back() == "noprefix") {
      noprefix = true;
      toks.pop_back();
    }
    const std::string_view kw = toks[0];

    if (kw == "base") {
      if (toks.size() != 3) throw malformed("expected 'base <dim-symbol> <name>'");
      std::string_view sym = toks[1] == "Theta" ? std::string_view("Θ") : toks[1];
      auto it = std::find(kBaseSymbols.begin(), kBaseSymbols.end(), sym);
      if (it == kBaseSymbols.end()) {
        throw malformed("unknown base dimension symbol '" + std::string(toks[1]) + "'");
      }
      const auto q = static_cast<BaseQuantity>(it - kBaseSymbols.begin());
      if (static_cast<std::size_t>(q) >= arity_of(mode_)) {
        throw DefinitionError(DefinitionError::Kind::kUnsupported, line_no,
                              "angle base dimension requires strict-angle mode");
      }
      for (const UnitDef& u : units_) {
        if (u.factor == 1.0 && u.dimension == DimensionVector::base(q, mode_)) {
          throw DefinitionError(DefinitionError::Kind::kDuplicateName, line_no,
                                "base dimension " + std::string(sym) + " already has unit '" +
                                    u.name + "'");
        }
      }
      claim_name(toks[2], line_no);
      add_unit({std::string(toks[2]), {}, 1.0, DimensionVector::base(q, mode_), !noprefix});
    } else if (kw == "prefix") {
      if (toks.size() != 3) throw malformed("expected 'prefix <symbol> <factor>'");
      if (!valid_name(toks[1])) throw malformed("invalid prefix symbol '" + std::string(toks[1]) + "'");
      if (prefixes_.count(std::string(toks[1])) != 0) {
        throw DefinitionError(DefinitionError::Kind::kDuplicateName, line_no,
                              "duplicate prefix '" + std::string(toks[1]) + "'");
      }
      prefixes_[std::string(toks[1])] = {std::string(toks[1]), parse_factor(toks[2], line_no)};
    } else if (kw == "unit") {
      if (toks.size() < 4) throw malformed("expected 'unit <name> <factor> <unit-expr>'");
      std::string expr_text;
      for (std::size_t k = 3; k < toks.size(); ++k) {
        if (toks[k] == "offset" || toks[k].find('+') != std::string_view::npos) {
          throw DefinitionError(DefinitionError::Kind::kUnsupported, line_no,
                                "offset units are not supported");
        }
        if (toks[k] == "log" || toks[k] == "logbase") {
          throw DefinitionError(DefinitionError::Kind::kUnsupported, line_no,
                                "logarithmic units are not supported");
        }
        expr_text += toks[k];
      }
      claim_name(toks[1], line_no);
      const double f = parse_factor(toks[2], line_no);
      UnitExpr expr;
      try {
        expr = parse(expr_text);
      } catch (const UnitParseError& e) {
        if (e.kind == UnitParseError::Kind::kMalformed) throw malformed(e.what());
        throw DefinitionError(DefinitionError::Kind::kUnknownReferencedUnit, line_no, e.what());
      }
      add_unit({std::string(toks[1]), {}, f * expr.factor(), expr.dimension(), !noprefix});
    } else if (kw == "alias") {
      if (toks.size() != 3 || noprefix) throw malformed("expected 'alias <name> <existing-name>'");
      auto it = index_.find(std::string(toks[2]));
      if (it == index_.end()) {
        throw DefinitionError(DefinitionError::Kind::kUnknownReferencedUnit, line_no,
                              "alias target '" + std::string(toks[2]) + "' is not defined");
      }
      const std::size_t target = it->second;
      claim_name(toks[1], line_no);
      units_[target].aliases.emplace_back(toks[1]);
      index_[std::string(toks[1])] = target;
    } else {
      throw malformed("unknown directive '" + std::string(kw) + "'");
    }
  }

  AngleMode mode_;
  std::vector<UnitDef> units_;
  std::map<std::string, std::size_t> index_;  // names and aliases
  std::map<std::string, Prefix> prefixes_;
};

// Built-in registry with `text` applied over it.
inline UnitRegistry load_definitions(std::string_view text,
                                     AngleMode mode = AngleMode::kStandard) {
  UnitRegistry reg = UnitRegistry::builtin(mode);
  reg.load(text);
  return reg;
}

}  // namespace koq
