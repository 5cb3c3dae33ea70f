#pragma once

#include <algorithm>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "koq/diagnostic.hpp"
#include "koq/koq_engine.hpp"
#include "koq/quantity.hpp"
#include "koq/script.hpp"
#include "koq/unit_registry.hpp"

namespace koq {

// Angle handling is a property of the registry passed to check_script.
struct CheckOptions {
  bool strict_untagged = false;
};

namespace detail {

// An evaluated subexpression. The fault flags suppress follow-on checks so a
// single mistake produces a single diagnostic.
struct Value {
  Quantity q;
  bool indeterminate = false;  // magnitude is meaningless (e.g. after E101)
  bool unit_fault = false;
  bool koq_fault = false;
};

class Checker {
 public:
  Checker(const UnitRegistry& units, CheckOptions opts) : units_(units), opts_(opts) {}

  DiagnosticReport run(const Script& script) {
    for (const Statement& st : script.statements) {
      if (const auto* rel = std::get_if<RelationStmt>(&st.node)) {
        declare(*rel);
      } else if (const auto* let = std::get_if<LetStmt>(&st.node)) {
        bind(*let);
      }
    }
    std::stable_sort(report_.diagnostics.begin(), report_.diagnostics.end(), diagnostic_order);
    return std::move(report_);
  }

 private:
  void emit(DiagCode code, Span span, std::string message, Payload payload = {},
            Severity sev = Severity::kError) {
    report_.diagnostics.push_back({code, sev, span, std::move(message), std::move(payload)});
  }

  void declare(const RelationStmt& rel) {
    try {
      koqs_.declare(rel.target, rel.rhs_text);
    } catch (const RelationError& e) {
      emit(DiagCode::kParse, rel.target_span, e.what(), {{"koq", rel.target}});
    }
  }

  // Resolves a unit annotation, reporting E002/E001 at the offending atom.
  std::optional<UnitExpr> resolve_unit(const std::string& text, Span span) {
    try {
      return units_.parse(text);
    } catch (const UnitParseError& e) {
      const Span at{span.line, span.column + static_cast<int>(e.offset),
                    std::max(1, static_cast<int>(e.length))};
      const bool unknown = e.kind != UnitParseError::Kind::kMalformed;
      emit(unknown ? DiagCode::kUnknownUnit : DiagCode::kParse, clamp(at, span), e.what(),
           {{"unit", text}});
      return std::nullopt;
    }
  }

  static Span clamp(Span at, Span within) {
    const int end = within.column + std::max(within.length, 1);
    if (at.column >= end) at.column = end - 1;
    at.length = std::min(at.length, end - at.column);
    return at;
  }

  void bind(const LetStmt& let) {
    std::optional<UnitExpr> declared;
    if (let.unit_text) declared = resolve_unit(*let.unit_text, let.unit_span);
    std::optional<Value> rhs;
    if (let.value) rhs = eval(*let.value);

    if (!rhs) {
      if (!declared) {
        env_[let.name] = std::nullopt;
        return;
      }
      Value v{Quantity(0.0, *declared), true};
      finish(let, v, let.koq ? KoqSignature(*let.koq) : KoqSignature());
      return;
    }

    Value v = std::move(*rhs);
    bool unit_mismatch = false;
    if (declared) {
      if (!dim_eq(declared->dimension(), v.q.dimension())) {
        unit_mismatch = true;
        emit(DiagCode::kUnitAssign, let.name_span,
             "Cannot assign '" + v.q.unit().display() + "' (" + v.q.dimension().bracketed() +
                 ") to '" + let.name + "' declared '" + declared->display() + "' (" +
                 declared->dimension().bracketed() + ")",
             {{"declared_unit", declared->display()},
              {"declared_dimension", declared->dimension().bracketed()},
              {"actual_unit", v.q.unit().display()},
              {"actual_dimension", v.q.dimension().bracketed()}});
        v.q = Quantity(v.q.value(), *declared, v.q.koq());
        v.indeterminate = true;
      } else {
        v.q = q_convert(v.q, *declared);
      }
    }

    KoqSignature sig = v.q.koq();
    if (let.koq) {
      sig = KoqSignature(*let.koq);
      if (!unit_mismatch && !v.unit_fault && !v.koq_fault) {
        try {
          koqs_.tag(*let.koq, v.q.koq());
        } catch (const Type2KoqError& e) {
          emit(DiagCode::kKoqAssign, let.name_span, e.what(),
               {{"koq", e.name}, {"admissible", e.admissible}, {"actual", e.actual.str()}});
        }
      }
    }
    finish(let, v, std::move(sig));
  }

  void finish(const LetStmt& let, Value v, KoqSignature sig) {
    Binding b{let.name, let.name_span.line, std::nullopt, v.q.unit().display(),
              sig.empty() ? std::string() : sig.str()};
    if (!v.indeterminate) b.value = v.q.value();
    report_.bindings.push_back(std::move(b));
    env_[let.name] = Value{v.q.with_koq(std::move(sig)), v.indeterminate, false, false};
  }

  std::optional<Value> eval(const Expr& e) {
    return std::visit([&](const auto& node) { return eval_node(e, node); }, e.node);
  }

  std::optional<Value> eval_node(const Expr&, const NumberLit& lit) {
    if (!lit.unit_text) return Value{Quantity::scalar(lit.value, units_.mode())};
    auto unit = resolve_unit(*lit.unit_text, lit.unit_span);
    if (!unit) return std::nullopt;
    return Value{Quantity(lit.value, std::move(*unit))};
  }

  std::optional<Value> eval_node(const Expr& e, const Ident& id) {
    auto it = env_.find(id.name);
    if (it != env_.end()) return it->second;
    if (id.name == "pi") return Value{Quantity::scalar(std::numbers::pi, units_.mode())};
    emit(DiagCode::kParse, e.span, "use of undefined identifier '" + id.name + "'",
         {{"identifier", id.name}});
    // Report once; later uses stay silent.
    env_[id.name] = std::nullopt;
    return std::nullopt;
  }

  std::optional<Value> eval_node(const Expr& e, const Negate& n) {
    auto v = eval(*n.operand);
    if (!v) return std::nullopt;
    return arith(e.span, [&] { return q_mul(Quantity::scalar(-1.0, units_.mode()), v->q, MulOp::kMul); },
                 *v, *v);
  }

  std::optional<Value> eval_node(const Expr& e, const Power& p) {
    auto base = eval(*p.base);
    if (!base) return std::nullopt;
    try {
      return arith(e.span, [&] { return q_pow(base->q, p.exponent); }, *base, *base);
    } catch (const ZeroToNegativePower& z) {
      if (!base->indeterminate) emit(DiagCode::kParse, e.span, z.what());
      return arith(e.span, [&] { return q_pow(base->q.with_value(1.0), p.exponent); }, *base,
                   *base, true);
    }
  }

  std::optional<Value> eval_node(const Expr& e, const Binary& b) {
    auto lhs = eval(*b.lhs);
    auto rhs = eval(*b.rhs);
    if (!lhs || !rhs) return std::nullopt;
    if (b.op == '*' || b.op == '/') {
      const MulOp op = b.op == '*' ? MulOp::kMul : MulOp::kDiv;
      try {
        return arith(e.span, [&] { return q_mul(lhs->q, rhs->q, op); }, *lhs, *rhs);
      } catch (const DivideByZero& z) {
        if (!rhs->indeterminate) emit(DiagCode::kParse, b.op_span, z.what());
        return arith(e.span, [&] { return q_mul(lhs->q, rhs->q.with_value(1.0), op); }, *lhs,
                     *rhs, true);
      }
    }
    return add(b, *lhs, *rhs);
  }

  std::optional<Value> add(const Binary& b, const Value& lhs, const Value& rhs) {
    const int sign = b.op == '+' ? 1 : -1;
    const bool indeterminate = lhs.indeterminate || rhs.indeterminate;
    try {
      if (lhs.unit_fault || rhs.unit_fault || lhs.koq_fault || rhs.koq_fault) {
        // Kinds are not compared below a fault; the left kind carries on.
        Quantity q = q_add(lhs.q.with_koq({}), rhs.q.with_koq({}), sign);
        return Value{q.with_koq(lhs.q.koq()), indeterminate, lhs.unit_fault || rhs.unit_fault,
                     lhs.koq_fault || rhs.koq_fault};
      }
      bool untagged = false;
      Quantity q = q_add(lhs.q, rhs.q, sign, AddPolicy{false}, &untagged);
      if (untagged) {
        const KoqSignature& tagged = lhs.q.koq().empty() ? rhs.q.koq() : lhs.q.koq();
        emit(DiagCode::kUntaggedOperand, b.op_span, "untagged operand added to " + tagged.str(),
             {{"tagged", tagged.str()}},
             opts_.strict_untagged ? Severity::kError : Severity::kWarning);
      }
      return Value{std::move(q), indeterminate};
    } catch (const Type1UnitError& err) {
      emit(DiagCode::kUnitAdd, b.op_span, err.what(),
           {{"left_unit", err.left_unit},
            {"left_dimension", err.left_dimension},
            {"right_unit", err.right_unit},
            {"right_dimension", err.right_dimension}});
      return Value{lhs.q, true, true, lhs.koq_fault || rhs.koq_fault};
    } catch (const Type1KoqError& err) {
      emit(DiagCode::kKoqAdd, b.op_span, err.what(),
           {{"left_koq", err.left.str()}, {"right_koq", err.right.str()}});
      Quantity q = q_add(lhs.q.with_koq({}), rhs.q.with_koq({}), sign);
      return Value{q.with_koq(lhs.q.koq()), indeterminate, false, true};
    } catch (const QuantityError& err) {
      emit(DiagCode::kParse, b.op_span, err.what());
      return std::nullopt;
    }
  }

  template <class F>
  std::optional<Value> arith(Span span, F&& f, const Value& a, const Value& b,
                             bool force_indeterminate = false) {
    try {
      return Value{f(), force_indeterminate || a.indeterminate || b.indeterminate,
                   a.unit_fault || b.unit_fault, a.koq_fault || b.koq_fault};
    } catch (const DimensionError& err) {
      emit(DiagCode::kParse, span, err.what());
    } catch (const NonFiniteValue& err) {
      emit(DiagCode::kParse, span, err.what());
    }
    return std::nullopt;
  }

  const UnitRegistry& units_;
  CheckOptions opts_;
  KoqRegistry koqs_;
  std::map<std::string, std::optional<Value>> env_;
  DiagnosticReport report_;
};

}  // namespace detail

// Evaluates every binding in order. Relations take effect from their line
// onward; a faulty binding still takes its declared unit and kind.
inline DiagnosticReport check_script(const Script& script, const UnitRegistry& units,
                                     CheckOptions opts = {}) {
  return detail::Checker(units, opts).run(script);
}

// Parse and check in one step; parse diagnostics are merged into the report.
inline DiagnosticReport check_source(std::string_view text, const UnitRegistry& units,
                                     CheckOptions opts = {}) {
  ParseResult parsed = parse_script(text);
  DiagnosticReport report = check_script(parsed.script, units, opts);
  report.diagnostics.insert(report.diagnostics.end(), parsed.diagnostics.begin(),
                            parsed.diagnostics.end());
  std::stable_sort(report.diagnostics.begin(), report.diagnostics.end(), diagnostic_order);
  return report;
}

}  // namespace koq
