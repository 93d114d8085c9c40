#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace trunclab {

/// Edge length along a coordinate axis. Always >= 1 when it denotes an edge.
using Length = std::int64_t;

/// p_n = c for every n.
struct ConstantRule {
  double value = 0.0;
};

/// p_n = min(1, amplitude * n^(-exponent)).
struct PowerLawRule {
  double amplitude = 1.0;
  double exponent = 1.0;
};

/// Support {1, b, b^2, ...}.
struct PowersSupport {
  Length base = 10;
};

/// Support given as an explicit finite list of lengths.
struct ExplicitSupport {
  std::vector<Length> members;  // sorted, unique, all >= 1
};

using Support = std::variant<PowersSupport, ExplicitSupport>;

bool support_contains(const Support& s, Length n);
/// Smallest support member strictly greater than `after`, if representable.
std::optional<Length> support_next(const Support& s, Length after);

/// p_n = value on the support, background elsewhere.
struct LacunaryRule {
  Support support = PowersSupport{};
  double value = 0.0;
  double background = 0.0;
};

/// p_n = values[n-1] for n <= values.size(), tail otherwise.
struct TableRule {
  std::vector<double> values;
  double tail = 0.0;
};

using SequenceRule = std::variant<ConstantRule, PowerLawRule, LacunaryRule, TableRule>;

/// Positive truncation level N (p_{N,n} = 0 for n > N).
class TruncationLevel {
 public:
  explicit TruncationLevel(Length n);
  Length value() const noexcept { return n_; }

 private:
  Length n_;
};

/// Edge-openness law (p_n)_{n>=1}, optionally truncated. Immutable.
class ProbabilitySequence {
 public:
  /// Throws InvariantViolation if the rule can produce values outside [0, 1].
  explicit ProbabilitySequence(SequenceRule rule);

  static ProbabilitySequence constant(double c);
  static ProbabilitySequence power_law(double amplitude, double exponent);
  static ProbabilitySequence lacunary_powers(Length base, double value, double background = 0.0);
  static ProbabilitySequence lacunary_explicit(std::vector<Length> members, double value,
                                               double background = 0.0);
  static ProbabilitySequence table(std::vector<double> values, double tail = 0.0);
  /// Reads whitespace separated "n p_n" lines ('#' starts a comment). Lengths
  /// not listed below the largest listed one get probability 0.
  static ProbabilitySequence table_from_file(const std::filesystem::path& path, double tail = 0.0);

  /// p_n (p_{N,n} when truncated). Throws DomainError for n < 1.
  double eval(Length n) const;

  const SequenceRule& rule() const noexcept { return rule_; }
  std::optional<Length> truncation() const noexcept { return truncation_; }

  /// Human readable one-line description, stable across runs.
  std::string describe() const;

  friend ProbabilitySequence truncate(const ProbabilitySequence& seq, TruncationLevel level);

 private:
  double eval_rule(Length n) const;

  SequenceRule rule_;
  std::optional<Length> truncation_;
};

/// Truncated law: p_n for n <= N, 0 for n > N.
ProbabilitySequence truncate(const ProbabilitySequence& seq, TruncationLevel level);

/// Smallest l with lo < l <= hi and p_l >= eps, if any. Requires 0 <= lo < hi.
std::optional<Length> scan_support(const ProbabilitySequence& seq, double eps, Length lo, Length hi);

/// Declared epsilon with 2*eps = limsup p_n. Requires 0 < eps <= 1/2.
class EpsilonCertificate {
 public:
  EpsilonCertificate(double epsilon, std::string evidence);

  double epsilon() const noexcept { return epsilon_; }
  const std::string& evidence() const noexcept { return evidence_; }

 private:
  double epsilon_;
  std::string evidence_;
};

}  // namespace trunclab
