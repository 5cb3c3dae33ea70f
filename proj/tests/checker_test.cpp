#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "koq/checker.hpp"
#include "random.hpp"

using namespace koq;

namespace {

std::string read_sample(const std::string& name) {
  std::ifstream in(std::string(KOQ_SAMPLES_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DiagnosticReport check(const std::string& src, CheckOptions opts = {},
                       AngleMode mode = AngleMode::kStandard) {
  return check_source(src, UnitRegistry::builtin(mode), opts);
}

std::string codes(const DiagnosticReport& r) {
  std::string out;
  for (const Diagnostic& d : r.diagnostics) {
    if (!out.empty()) out += ' ';
    out += std::string(code_name(d.code)) + "@" + std::to_string(d.span.line);
  }
  return out;
}

}  // namespace

TEST(CheckerTest, Pint1) {
  const DiagnosticReport r = check(read_sample("pint1.pq"));
  EXPECT_EQ(codes(r), "E101@8");
  const Binding* total = r.binding("total");
  ASSERT_NE(total, nullptr);
  ASSERT_TRUE(total->value);
  EXPECT_NEAR(*total->value, 111.084, 111.084 * 1e-9);
  EXPECT_EQ(total->unit, "cm");
  const Diagnostic& d = r.diagnostics[0];
  EXPECT_EQ(std::get<std::string>(d.payload.at("left_dimension")), "[length]");
  EXPECT_EQ(std::get<std::string>(d.payload.at("right_dimension")), "[length]/[time]");
  EXPECT_EQ(d.message, "Cannot convert from 'cm' ([length]) to 'km/hr' ([length]/[time])");
  EXPECT_EQ(d.span.column, 30);
  EXPECT_FALSE(r.binding("bad")->value);
}

TEST(CheckerTest, Pint2TypeTwoUnitError) {
  const DiagnosticReport r = check(read_sample("pint2.pq"));
  EXPECT_EQ(codes(r), "E102@7");
  const Diagnostic& d = r.diagnostics[0];
  EXPECT_EQ(std::get<std::string>(d.payload.at("declared_dimension")), "[length]/[time]");
  EXPECT_EQ(std::get<std::string>(d.payload.at("actual_dimension")), "[length]");
  EXPECT_EQ(d.span, (Span{7, 5, 5}));
}

TEST(CheckerTest, KoqErrorsCorpus) {
  const DiagnosticReport r = check(read_sample("koqerrors.pq"));
  ASSERT_EQ(codes(r), "E201@17 E202@19");
  EXPECT_EQ(r.diagnostics[0].message, "Type 1 Kind of Quantity error: ROTENERGY vs 'TORQUE'");
  EXPECT_EQ(r.diagnostics[1].message,
            "Type 2 Kind of Quantity error: 'ROTENERGY = ['MOI*AV*AV']'");
  EXPECT_EQ(std::get<std::vector<std::string>>(r.diagnostics[1].payload.at("admissible")),
            std::vector<std::string>{"MOI*AV*AV"});
  EXPECT_EQ(std::get<std::string>(r.diagnostics[1].payload.at("actual")), "MOI/TIME^2");

  const double av1 = 10.0 / 60.0 * 2.0 * std::numbers::pi;
  const double av2 = 93.75 / 60.0 * 2.0 * std::numbers::pi;
  EXPECT_NEAR(*r.binding("torque_avg")->value, (av2 - av1) * 16000.0 / 180.0, 1e-9);
  EXPECT_NEAR(*r.binding("energy2")->value, 8000.0 * av2 * av2, 1e-6);
  EXPECT_NEAR(*r.binding("torque2")->value, 70e6 / av2, 1e-6);
  EXPECT_EQ(r.binding("torque2")->koq, "TORQUE");
  EXPECT_EQ(r.binding("energy2")->koq, "ROTENERGY");
}

TEST(CheckerTest, CorrectProgramIsClean) {
  const DiagnosticReport r = check(read_sample("correct.pq"));
  EXPECT_TRUE(r.diagnostics.empty()) << codes(r);
}

TEST(CheckerTest, StrictAngle) {
  const std::string src = read_sample("strict_angle.pq");
  EXPECT_TRUE(check(src).diagnostics.empty());
  const DiagnosticReport strict = check(src, {}, AngleMode::kStrict);
  ASSERT_EQ(codes(strict), "E101@4");
  EXPECT_EQ(std::get<std::string>(strict.diagnostics[0].payload.at("right_dimension")),
            "[length]^2*[mass]/[time]^2/[angle]");
}

TEST(CheckerTest, RelationsApplyFromTheirLine) {
  const DiagnosticReport r = check(
      "let p: POWER [W] = 5 W\n"
      "let w: AV [1/s] = 2 Hz\n"
      "let t1: TORQUE = p/w\n"
      "relation TORQUE = POWER/AV\n"
      "let t2: TORQUE = p/w\n");
  EXPECT_EQ(codes(r), "E202@3");
}

TEST(CheckerTest, UntaggedOperand) {
  const std::string src =
      "let a: AV [1/s] = 2 Hz\n"
      "let b: untyped = a + 1 [1/s]\n";
  const DiagnosticReport warn = check(src);
  ASSERT_EQ(codes(warn), "W301@2");
  EXPECT_EQ(warn.diagnostics[0].severity, Severity::kWarning);
  EXPECT_FALSE(warn.has_errors());
  EXPECT_EQ(warn.binding("b")->koq, "AV");
  const DiagnosticReport strict = check(src, CheckOptions{true});
  ASSERT_EQ(codes(strict), "W301@2");
  EXPECT_EQ(strict.diagnostics[0].severity, Severity::kError);
}

TEST(CheckerTest, ScalarsAreTransparentButTaggedDimensionlessIsNot) {
  const DiagnosticReport r = check(
      "relation SPEED = MACH*SOUND\n"
      "let m: MACH = 0.8\n"
      "let c: SOUND [m/s] = 340 [m/s]\n"
      "let v: SPEED = m*c\n"
      "let v2: SPEED = 0.8*c\n");
  EXPECT_EQ(codes(r), "E202@5");
}

TEST(CheckerTest, UnitErrorSuppressesKoqChecks) {
  const DiagnosticReport r = check(
      "relation E = M*V*V\n"
      "let m: M [kg] = 2 kg\n"
      "let v: V [m/s] = 3 [m/s]\n"
      "let wrong: E [J] = m*v\n"
      "let sum: E = m*v*v + m\n");
  EXPECT_EQ(codes(r), "E102@4 E101@5");
}

TEST(CheckerTest, KoqErrorDoesNotCascade) {
  const DiagnosticReport r = check(
      "relation R = A*A\n"
      "let a: A [m] = 1 m\n"
      "let b: B [m] = 1 m\n"
      "let c: R = (a + b) * a\n");
  EXPECT_EQ(codes(r), "E201@4");
}

TEST(CheckerTest, UnknownUnitsAndIdentifiers) {
  const DiagnosticReport r = check(
      "let a: untyped = 3 furlong\n"
      "let b: untyped [xm] = 1 m\n"
      "let c: untyped = nope + nope\n"
      "let d: untyped = a\n"
      "let e: untyped [m] = 2 [m*]\n");
  EXPECT_EQ(codes(r), "E002@1 E002@2 E001@3 E001@5");
  EXPECT_EQ(r.diagnostics[0].span, (Span{1, 20, 7}));
  EXPECT_EQ(r.diagnostics[1].span, (Span{2, 17, 2}));
  EXPECT_EQ(r.diagnostics[2].span, (Span{3, 18, 4}));
  EXPECT_EQ(r.binding("d"), nullptr);
  EXPECT_EQ(r.binding("e")->unit, "m");
  EXPECT_FALSE(r.binding("e")->value);
}

TEST(CheckerTest, DivisionByZeroAndZeroPower) {
  const DiagnosticReport r = check(
      "let z: untyped [s] = 0 s\n"
      "let a: untyped [m/s] = 1 m / z\n"
      "let b: untyped = z^-1\n"
      "let c: untyped [1/s] = 1 / z\n");
  EXPECT_EQ(codes(r), "E001@2 E001@3 E001@4");
  EXPECT_EQ(r.binding("a")->unit, "m/s");
  EXPECT_FALSE(r.binding("a")->value);
}

TEST(CheckerTest, ExponentOverflowIsReported) {
  const DiagnosticReport r = check("let a: untyped = (1 m^30) * (1 m^30)\n");
  EXPECT_EQ(codes(r), "E001@1");
}

TEST(CheckerTest, RebindingShadows) {
  const DiagnosticReport r = check(
      "let x: untyped [m] = 1 m\n"
      "let x: untyped [s] = 2 s\n"
      "let y: untyped [s] = x + 1 s\n");
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_DOUBLE_EQ(*r.binding("y")->value, 3.0);
  EXPECT_EQ(r.bindings.size(), 3u);
}

TEST(CheckerTest, DeclaredUnitConverts) {
  const DiagnosticReport r = check("let d: untyped [cm] = 3.3 ft\nlet e: untyped [ft*lbf] = 1 kJ\n");
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_NEAR(*r.binding("d")->value, 100.584, 1e-9);
  EXPECT_NEAR(*r.binding("e")->value, 1000.0 / (0.3048 * 4.4482216152605), 1e-9);
}

TEST(CheckerTest, BadRelationIsReported) {
  const DiagnosticReport r = check("relation X = X\nlet y: untyped = 1\n");
  EXPECT_EQ(codes(r), "E001@1");
}

TEST(CheckerTest, PiIsPredefinedAndShadowable) {
  const DiagnosticReport r = check("let a: untyped = 2*pi\nlet pi: untyped = 3\nlet b: untyped = pi\n");
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_DOUBLE_EQ(*r.binding("a")->value, 2 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(*r.binding("b")->value, 3.0);
}

TEST(CheckerProperty, DeterministicAndOrdered) {
  const std::string src = read_sample("koqerrors.pq") + read_sample("pint1.pq");
  const DiagnosticReport a = check(src);
  const DiagnosticReport b = check(src);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::is_sorted(a.diagnostics.begin(), a.diagnostics.end(), diagnostic_order));
}

namespace {

std::vector<std::string> lines_of(const std::string& src) {
  std::vector<std::string> out;
  std::istringstream in(src);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

bool span_inside(const Span& s, const std::vector<std::string>& lines) {
  if (s.line < 1 || s.line > static_cast<int>(lines.size())) return false;
  const int len = static_cast<int>(lines[static_cast<std::size_t>(s.line) - 1].size());
  return s.column >= 1 && s.length >= 0 && s.column - 1 + s.length <= len &&
         (s.length > 0 || s.column <= len + 1);
}

}  // namespace

TEST(CheckerProperty, SpansAreValidAndLayeringHolds) {
  testkit::Gen gen(606);
  const std::vector<std::string> corpus = {read_sample("koqerrors.pq"), read_sample("pint1.pq"),
                                           read_sample("pint2.pq"), read_sample("strict_angle.pq")};
  const std::string junk = "+-*/()[]^:= x1ftAV";
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::string> lines = lines_of(corpus[static_cast<std::size_t>(gen.integer(0, 3))]);
    // Mutate a few characters anywhere in the file.
    for (int k = gen.integer(1, 3); k > 0; --k) {
      auto& line = lines[static_cast<std::size_t>(gen.integer(0, static_cast<int>(lines.size()) - 1))];
      if (line.empty()) continue;
      const auto at = static_cast<std::size_t>(gen.integer(0, static_cast<int>(line.size()) - 1));
      line[at] = junk[static_cast<std::size_t>(gen.integer(0, static_cast<int>(junk.size()) - 1))];
    }
    const DiagnosticReport r = check(join(lines));
    for (const Diagnostic& d : r.diagnostics) {
      ASSERT_TRUE(span_inside(d.span, lines))
          << code_name(d.code) << " " << d.span.line << ":" << d.span.column << "+" << d.span.length;
    }
    for (const Diagnostic& e2 : r.diagnostics) {
      if (e2.code != DiagCode::kKoqAdd && e2.code != DiagCode::kKoqAssign) continue;
      for (const Diagnostic& e1 : r.diagnostics) {
        if (e1.code != DiagCode::kUnitAdd && e1.code != DiagCode::kUnitAssign) continue;
        ASSERT_FALSE(e1.span == e2.span) << "KOQ and unit diagnostic on the same node";
      }
    }
  }
}

TEST(CheckerProperty, SingleLineCorruptionIsLocal) {
  const std::vector<std::string> base = lines_of(read_sample("koqerrors.pq"));
  const DiagnosticReport clean = check(join(base));
  for (std::size_t victim = 0; victim < base.size(); ++victim) {
    if (base[victim].empty() || base[victim][0] == '#') continue;
    // Corrupt into a parse error; keep the name bound for later lines by
    // only breaking the expression when the line is a let.
    std::vector<std::string> lines = base;
    lines[victim] += " )";
    const DiagnosticReport r = check(join(lines));
    std::vector<Diagnostic> others;
    for (const Diagnostic& d : r.diagnostics) {
      if (d.span.line != static_cast<int>(victim) + 1) others.push_back(d);
    }
    std::vector<Diagnostic> expected;
    for (const Diagnostic& d : clean.diagnostics) {
      if (d.span.line != static_cast<int>(victim) + 1) expected.push_back(d);
    }
    if (base[victim].rfind("relation", 0) == 0) continue;  // later tags depend on it
    // Diagnostics on lines that do not read the victim's binding must match.
    const std::string name = base[victim].substr(4, base[victim].find(':') - 4);
    std::vector<Diagnostic> filtered_actual;
    std::vector<Diagnostic> filtered_expected;
    auto uses_name = [&](int line) {
      const std::string& l = base[static_cast<std::size_t>(line) - 1];
      const auto eq = l.find('=');
      return eq != std::string::npos && l.find(name, eq) != std::string::npos;
    };
    for (const auto& d : others) {
      if (!uses_name(d.span.line)) filtered_actual.push_back(d);
    }
    for (const auto& d : expected) {
      if (!uses_name(d.span.line)) filtered_expected.push_back(d);
    }
    EXPECT_EQ(filtered_actual, filtered_expected) << "victim line " << victim + 1;
  }
}
