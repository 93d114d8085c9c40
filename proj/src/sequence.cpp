#include "trunclab/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "trunclab/errors.hpp"

namespace trunclab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void require_probability(double p, const char* what) {
  if (!is_probability(p)) {
    throw InvariantViolation(std::string(what) + " must lie in [0, 1]");
  }
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

bool support_contains(const Support& s, Length n) {
  if (n < 1) return false;
  return std::visit(overloaded{
                        [n](const PowersSupport& p) {
                          Length m = n;
                          while (m % p.base == 0) m /= p.base;
                          return m == 1;
                        },
                        [n](const ExplicitSupport& e) {
                          return std::binary_search(e.members.begin(), e.members.end(), n);
                        },
                    },
                    s);
}

std::optional<Length> support_next(const Support& s, Length after) {
  return std::visit(
      overloaded{
          [after](const PowersSupport& p) -> std::optional<Length> {
            Length v = 1;
            while (v <= after) {
              if (v > std::numeric_limits<Length>::max() / p.base) return std::nullopt;
              v *= p.base;
            }
            return v;
          },
          [after](const ExplicitSupport& e) -> std::optional<Length> {
            auto it = std::upper_bound(e.members.begin(), e.members.end(), after);
            if (it == e.members.end()) return std::nullopt;
            return *it;
          },
      },
      s);
}

TruncationLevel::TruncationLevel(Length n) : n_(n) {
  if (n < 1) throw InvariantViolation("truncation level N must be >= 1");
}

ProbabilitySequence::ProbabilitySequence(SequenceRule rule) : rule_(std::move(rule)) {
  std::visit(overloaded{
                 [](ConstantRule& r) { require_probability(r.value, "constant value"); },
                 [](PowerLawRule& r) {
                   if (!(r.amplitude >= 0.0) || !std::isfinite(r.amplitude) ||
                       !std::isfinite(r.exponent)) {
                     throw InvariantViolation("power-law amplitude must be finite and >= 0");
                   }
                 },
                 [](LacunaryRule& r) {
                   require_probability(r.value, "lacunary on-support value");
                   require_probability(r.background, "lacunary background");
                   if (auto* p = std::get_if<PowersSupport>(&r.support); p && p->base < 2) {
                     throw InvariantViolation("powers support needs base >= 2");
                   }
                   if (auto* e = std::get_if<ExplicitSupport>(&r.support)) {
                     std::sort(e->members.begin(), e->members.end());
                     e->members.erase(std::unique(e->members.begin(), e->members.end()),
                                      e->members.end());
                     if (!e->members.empty() && e->members.front() < 1) {
                       throw InvariantViolation("support members must be >= 1");
                     }
                   }
                 },
                 [](TableRule& r) {
                   for (double v : r.values) require_probability(v, "table entry");
                   require_probability(r.tail, "table tail");
                 },
             },
             rule_);
}

ProbabilitySequence ProbabilitySequence::constant(double c) {
  return ProbabilitySequence(ConstantRule{c});
}

ProbabilitySequence ProbabilitySequence::power_law(double amplitude, double exponent) {
  return ProbabilitySequence(PowerLawRule{amplitude, exponent});
}

ProbabilitySequence ProbabilitySequence::lacunary_powers(Length base, double value,
                                                         double background) {
  return ProbabilitySequence(LacunaryRule{PowersSupport{base}, value, background});
}

ProbabilitySequence ProbabilitySequence::lacunary_explicit(std::vector<Length> members,
                                                           double value, double background) {
  return ProbabilitySequence(LacunaryRule{ExplicitSupport{std::move(members)}, value, background});
}

ProbabilitySequence ProbabilitySequence::table(std::vector<double> values, double tail) {
  return ProbabilitySequence(TableRule{std::move(values), tail});
}

ProbabilitySequence ProbabilitySequence::table_from_file(const std::filesystem::path& path,
                                                         double tail) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sequence table " + path.string());
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Length n = 0;
    double p = 0.0;
    if (!(ls >> n)) continue;
    if (!(ls >> p) || n < 1) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'n p_n'");
    }
    if (static_cast<std::size_t>(n) > values.size()) values.resize(static_cast<std::size_t>(n), 0.0);
    values[static_cast<std::size_t>(n - 1)] = p;
  }
  return table(std::move(values), tail);
}

double ProbabilitySequence::eval_rule(Length n) const {
  return std::visit(overloaded{
                        [](const ConstantRule& r) { return r.value; },
                        [n](const PowerLawRule& r) {
                          double v = r.amplitude * std::pow(static_cast<double>(n), -r.exponent);
                          return std::min(1.0, v);
                        },
                        [n](const LacunaryRule& r) {
                          return support_contains(r.support, n) ? r.value : r.background;
                        },
                        [n](const TableRule& r) {
                          auto idx = static_cast<std::size_t>(n - 1);
                          return idx < r.values.size() ? r.values[idx] : r.tail;
                        },
                    },
                    rule_);
}

double ProbabilitySequence::eval(Length n) const {
  if (n < 1) throw DomainError("p_n is defined for n >= 1, got n=" + std::to_string(n));
  if (truncation_ && n > *truncation_) return 0.0;
  return eval_rule(n);
}

std::string ProbabilitySequence::describe() const {
  std::string s = std::visit(
      overloaded{
          [](const ConstantRule& r) { return "constant(c=" + fmt_double(r.value) + ")"; },
          [](const PowerLawRule& r) {
            return "power-law(amplitude=" + fmt_double(r.amplitude) +
                   ", exponent=" + fmt_double(r.exponent) + ")";
          },
          [](const LacunaryRule& r) {
            std::string sup;
            if (auto* p = std::get_if<PowersSupport>(&r.support)) {
              sup = "powers of " + std::to_string(p->base);
            } else {
              sup = std::to_string(std::get<ExplicitSupport>(r.support).members.size()) +
                    " explicit lengths";
            }
            return "lacunary(" + sup + ", c=" + fmt_double(r.value) +
                   ", background=" + fmt_double(r.background) + ")";
          },
          [](const TableRule& r) {
            return "table(" + std::to_string(r.values.size()) +
                   " entries, tail=" + fmt_double(r.tail) + ")";
          },
      },
      rule_);
  if (truncation_) s += " truncated at N=" + std::to_string(*truncation_);
  return s;
}

ProbabilitySequence truncate(const ProbabilitySequence& seq, TruncationLevel level) {
  ProbabilitySequence out = seq;
  out.truncation_ = seq.truncation_ ? std::min(*seq.truncation_, level.value()) : level.value();
  return out;
}

std::optional<Length> scan_support(const ProbabilitySequence& seq, double eps, Length lo,
                                   Length hi) {
  if (lo < 0 || lo >= hi) throw DomainError("scan_support requires 0 <= lo < hi");
  if (auto n = seq.truncation()) hi = std::min(hi, *n);
  if (lo >= hi) return std::nullopt;

  auto linear = [&](Length from) -> std::optional<Length> {
    for (Length l = from; l <= hi; ++l) {
      if (seq.eval(l) >= eps) return l;
    }
    return std::nullopt;
  };
  auto within = [hi](std::optional<Length> l) -> std::optional<Length> {
    if (l && *l <= hi) return l;
    return std::nullopt;
  };

  return std::visit(
      overloaded{
          [&](const ConstantRule& r) -> std::optional<Length> {
            if (r.value >= eps) return lo + 1;
            return std::nullopt;
          },
          [&](const PowerLawRule& r) -> std::optional<Length> {
            if (r.exponent >= 0.0) {
              // nonincreasing in n: only the first candidate can qualify
              if (seq.eval(lo + 1) >= eps) return lo + 1;
              return std::nullopt;
            }
            return linear(lo + 1);
          },
          [&](const LacunaryRule& r) -> std::optional<Length> {
            bool on = r.value >= eps;
            bool off = r.background >= eps;
            if (on && off) return lo + 1;
            if (on) return within(support_next(r.support, lo));
            if (off) {
              for (Length l = lo + 1; l <= hi; ++l) {
                if (!support_contains(r.support, l)) return l;
              }
            }
            return std::nullopt;
          },
          [&](const TableRule& r) -> std::optional<Length> {
            auto table_end = static_cast<Length>(r.values.size());
            for (Length l = lo + 1; l <= std::min(hi, table_end); ++l) {
              if (r.values[static_cast<std::size_t>(l - 1)] >= eps) return l;
            }
            if (r.tail >= eps) return within(std::max(lo, table_end) + 1);
            return std::nullopt;
          },
      },
      seq.rule());
}

EpsilonCertificate::EpsilonCertificate(double epsilon, std::string evidence)
    : epsilon_(epsilon), evidence_(std::move(evidence)) {
  if (!(epsilon > 0.0)) throw InvariantViolation("epsilon must be > 0");
  if (!(2.0 * epsilon <= 1.0)) {
    throw InvariantViolation("epsilon must satisfy 2*eps <= 1 since limsup p_n <= 1");
  }
}

}  // namespace trunclab
