#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace koq {

enum class MulOp { kMul, kDiv };

// Canonical multiset of kind-of-quantity names with signed exponents.
// Empty means scalar / untagged.
class KoqSignature {
 public:
  using Terms = std::map<std::string, int>;

  KoqSignature() = default;
  explicit KoqSignature(std::string_view name) { terms_.emplace(name, 1); }
  explicit KoqSignature(const Terms& terms) {
    for (const auto& [name, exp] : terms) {
      if (exp != 0) terms_.emplace(name, exp);
    }
  }

  bool empty() const { return terms_.empty(); }
  const Terms& terms() const { return terms_; }

  int exponent(const std::string& name) const {
    auto it = terms_.find(name);
    return it == terms_.end() ? 0 : it->second;
  }

  bool is_single(std::string_view name) const {
    return terms_.size() == 1 && terms_.begin()->first == name && terms_.begin()->second == 1;
  }

  KoqSignature pow(int n) const {
    KoqSignature r;
    if (n == 0) return r;
    for (const auto& [name, exp] : terms_) r.terms_.emplace(name, exp * n);
    return r;
  }

  friend KoqSignature combine_mul(const KoqSignature& a, const KoqSignature& b, MulOp op) {
    KoqSignature r = a;
    const int sign = op == MulOp::kMul ? 1 : -1;
    for (const auto& [name, exp] : b.terms_) {
      int& slot = r.terms_[name];
      slot += sign * exp;
      if (slot == 0) r.terms_.erase(name);
    }
    return r;
  }

  friend bool operator==(const KoqSignature&, const KoqSignature&) = default;

  // "AV^2*MOI", "MOI/TIME^2", "1/TIME"; "1" when empty.
  std::string str() const {
    std::string num;
    std::string den;
    for (const auto& [name, exp] : terms_) {
      std::string term = name;
      const int mag = exp < 0 ? -exp : exp;
      if (mag != 1) term += "^" + std::to_string(mag);
      if (exp > 0) {
        if (!num.empty()) num += '*';
        num += term;
      } else {
        den += '/';
        den += term;
      }
    }
    if (num.empty()) num = "1";
    return num + den;
  }

 private:
  Terms terms_;
};

struct KoqError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RelationError : public KoqError {
  enum class Kind { kMalformed, kSelfRelation };
  RelationError(Kind k, std::size_t off, const std::string& msg)
      : KoqError(msg), kind(k), offset(off) {}
  Kind kind;
  std::size_t offset;
};

// Addition of two different kinds, e.g. ROTENERGY + TORQUE.
struct Type1KoqError : public KoqError {
  Type1KoqError(KoqSignature l, KoqSignature r)
      : KoqError("Type 1 Kind of Quantity error: " + l.str() + " vs '" + r.str() + "'"),
        left(std::move(l)),
        right(std::move(r)) {}
  KoqSignature left;
  KoqSignature right;
};

// Tagging an expression whose composition matches no declared relation.
struct Type2KoqError : public KoqError {
  Type2KoqError(std::string n, std::vector<std::string> rels, KoqSignature act)
      : KoqError("Type 2 Kind of Quantity error: " + render(n, rels)),
        name(std::move(n)),
        admissible(std::move(rels)),
        actual(std::move(act)) {}
  std::string name;
  std::vector<std::string> admissible;
  KoqSignature actual;

  // 'ROTENERGY = ['MOI*AV*AV']'
  static std::string render(const std::string& name, const std::vector<std::string>& rels) {
    std::string out = "'" + name + " = [";
    for (std::size_t i = 0; i < rels.size(); ++i) {
      if (i != 0) out += ", ";
      out += "'" + rels[i] + "'";
    }
    return out + "]'";
  }
};

// Tagged + untagged addition when the strict policy is on.
struct UntaggedOperandError : public KoqError {
  explicit UntaggedOperandError(const KoqSignature& tagged)
      : KoqError("untagged operand added to " + tagged.str()) {}
};

namespace detail {

inline bool koq_name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

inline bool koq_name_char(char c) { return koq_name_start(c) || (c >= '0' && c <= '9'); }

}  // namespace detail

inline bool valid_koq_name(std::string_view s) {
  return !s.empty() && detail::koq_name_start(s[0]) &&
         std::all_of(s.begin(), s.end(), detail::koq_name_char);
}

struct ParsedRelation {
  KoqSignature signature;
  std::string text;  // tokens re-joined without whitespace, e.g. "MOI*AV*AV"
};

// NAME (("*"|"/") NAME)*; whitespace between tokens is ignored.
inline ParsedRelation parse_relation_expr(std::string_view text) {
  ParsedRelation out;
  KoqSignature::Terms acc;
  std::size_t i = 0;
  int sign = 1;
  auto skip_ws = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  while (true) {
    skip_ws();
    if (i == text.size() || !detail::koq_name_start(text[i])) {
      throw RelationError(RelationError::Kind::kMalformed, i,
                          i == text.size() ? "expected KOQ name at end of relation"
                                           : "expected KOQ name in relation");
    }
    const std::size_t start = i;
    while (i < text.size() && detail::koq_name_char(text[i])) ++i;
    const std::string name(text.substr(start, i - start));
    acc[name] += sign;
    out.text += name;
    skip_ws();
    if (i == text.size()) break;
    if (text[i] == '*') {
      sign = 1;
    } else if (text[i] == '/') {
      sign = -1;
    } else {
      throw RelationError(RelationError::Kind::kMalformed, i,
                          std::string("unexpected '") + text[i] + "' in relation");
    }
    out.text += text[i];
    ++i;
  }
  out.signature = KoqSignature(acc);
  return out;
}

struct KoqRelation {
  std::string target;
  KoqSignature rhs;
  std::string source_text;
};

struct AddOutcome {
  KoqSignature signature;
  bool untagged_operand = false;
};

// Unit compatibility is the caller's responsibility; this only compares kinds.
inline AddOutcome check_add(const KoqSignature& a, const KoqSignature& b,
                            bool strict_untagged = false) {
  if (a == b) return {a, false};
  if (a.empty() || b.empty()) {
    const KoqSignature& tagged = a.empty() ? b : a;
    if (strict_untagged) throw UntaggedOperandError(tagged);
    return {tagged, true};
  }
  throw Type1KoqError(a, b);
}

class KoqRegistry {
 public:
  // Adds an admissible form for `target`. Earlier forms stay admissible;
  // an identical form is collapsed into the existing one.
  KoqRegistry& declare(std::string_view target, std::string_view rhs_text) {
    if (!valid_koq_name(target)) {
      throw RelationError(RelationError::Kind::kMalformed, 0,
                          "invalid KOQ name '" + std::string(target) + "'");
    }
    ParsedRelation parsed = parse_relation_expr(rhs_text);
    if (parsed.signature.empty()) {
      throw RelationError(RelationError::Kind::kMalformed, 0,
                          "relation '" + parsed.text + "' cancels to a scalar");
    }
    if (parsed.signature.is_single(target)) {
      throw RelationError(RelationError::Kind::kSelfRelation, 0,
                          "relation for " + std::string(target) + " refers only to itself");
    }
    auto& list = relations_[std::string(target)];
    const bool duplicate = std::any_of(list.begin(), list.end(), [&](const KoqRelation& r) {
      return r.rhs == parsed.signature;
    });
    if (!duplicate) {
      list.push_back({std::string(target), std::move(parsed.signature), std::move(parsed.text)});
    }
    return *this;
  }

  const std::vector<KoqRelation>& relations(const std::string& target) const {
    static const std::vector<KoqRelation> kNone;
    auto it = relations_.find(target);
    return it == relations_.end() ? kNone : it->second;
  }

  const std::map<std::string, std::vector<KoqRelation>>& all() const { return relations_; }

  // Accepts an untagged value, a value already of this kind, or one whose
  // signature equals a declared relation for `name`.
  KoqSignature tag(std::string_view name, const KoqSignature& node) const {
    if (!valid_koq_name(name)) {
      throw RelationError(RelationError::Kind::kMalformed, 0,
                          "invalid KOQ name '" + std::string(name) + "'");
    }
    KoqSignature tagged(name);
    if (node.empty() || node == tagged) return tagged;
    const auto& rels = relations(std::string(name));
    for (const KoqRelation& r : rels) {
      if (r.rhs == node) return tagged;
    }
    std::vector<std::string> admissible;
    admissible.reserve(rels.size());
    for (const KoqRelation& r : rels) admissible.push_back(r.source_text);
    throw Type2KoqError(std::string(name), std::move(admissible), node);
  }

 private:
  std::map<std::string, std::vector<KoqRelation>> relations_;
};

}  // namespace koq
