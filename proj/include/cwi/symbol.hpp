#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cwi/functionals.hpp"

namespace cwi {

/// Frequency arguments (xi2, xi3, xi4) of the increment symbol; the fourth
/// frequency is implied by the convolution constraint xi1 = -(xi2+xi3+xi4).
struct FrequencyTriple {
  Eigen::Vector3d xi2, xi3, xi4;
  Eigen::Vector3d xi1() const { return -(xi2 + xi3 + xi4); }
};

/// mu = 1 - m(xi2+xi3+xi4) / (m(xi2) m(xi3) m(xi4)). Vanishes identically
/// when all four of |xi2|, |xi3|, |xi4|, |xi2+xi3+xi4| lie at or below N.
double mu(const FrequencyTriple& t, const MultiplierProfile& prof);

/// Dyadic shell magnitudes of the four interacting frequencies; the last
/// three are required in nonincreasing order (N2 >= N3 >= N4).
struct ShellQuadruple {
  double N1, N2, N3, N4;
};

enum class CaseLabel { vanishing, case1a, case1b, case2, case3 };
std::string case_name(CaseLabel c);

struct CaseConfig {
  double comparability = 4.0;  // N1* ~ N2* within this factor
  double low_factor = 0.25;    // mu treated as vanishing for N1* < low*N
};

/// Classifies a shell quadruple:
///  - vanishing when the largest shell sits below low_factor * N, or when
///    the two largest shells are not comparable (the convolution constraint
///    then empties the interaction);
///  - case 1: largest is N2, second largest N1 (subcase a when N3 is at
///    least low_factor * N, subcase b when N3 sits below it);
///  - case 2: largest is N1, second largest N2;
///  - case 3: largest is N2, second largest N3.
/// Ties between N1 and the equal shells prefer cases 1/2 deterministically.
CaseLabel classify_case(const ShellQuadruple& shells,
                        const MultiplierProfile& prof,
                        const CaseConfig& cfg = {});

/// Pointwise bound B(N2, N3, N4) of |mu| for the classified case, with the
/// exact m of the profile:
///  case 1a / 2 (high N3):  1 / (m(N3) m(N4))
///  case 1b / 2 (low N3):   N3 / N2          (mean-value bound)
///  case 3:                 m(N1) / (m(N2) m(N3) m(N4))
double case_bound(const ShellQuadruple& shells, CaseLabel label,
                  const MultiplierProfile& prof, const CaseConfig& cfg = {});

struct CaseStats {
  CaseLabel label;
  std::int64_t samples = 0;
  double max_ratio = 0.0;  // fitted K: max |mu| / B over the samples
  FrequencyTriple argmax;
  ShellQuadruple argmax_shells{0, 0, 0, 0};
};

struct SymbolReport {
  std::vector<CaseStats> cases;
  std::int64_t vanishing_samples = 0;
  double vanishing_max_mu = 0.0;  // must stay at exactly 0
  bool pass = true;               // no ratio above the ceiling
  std::string csv() const;
};

struct SymbolVerifyConfig {
  CaseConfig cases;
  double ratio_ceiling = 100.0;
  int shell_span_above = 8;  // shells sampled up to N * 2^span_above
  int shell_span_below = 6;  // and down to N * 2^-span_below
};

/// Draws frequency triples uniformly inside randomly chosen dyadic annuli
/// (uniform radius within the band, uniform direction), classifies each, and
/// accumulates per-case max |mu|/B. Deterministic for a fixed seed.
SymbolReport verify_symbol_bounds(const MultiplierProfile& prof,
                                  std::int64_t samples, std::uint64_t seed,
                                  const SymbolVerifyConfig& cfg = {});

struct CommutatorResult {
  double commutator;    // ∫_J ∫ (dt Iu) [ (Iu)^3 - I(u^3) ] dx dt
  double delta_E;       // E(Iu(b)) - E(Iu(a))
  double mismatch_rel;  // |commutator - delta_E| / max(|delta_E|, 1e-12)
};

/// Two-route increment check: the time-integrated commutator against the
/// direct mollified-energy difference over J. The cubic source matches the
/// integrator's (dealiased; absent on linear runs, where the identity
/// reduces to the quartic term's own variation). Trapezoid time quadrature
/// on the snapshot lattice.
CommutatorResult energy_increment_commutator(const Trajectory& traj,
                                             const SubInterval& J,
                                             const MultiplierProfile& prof);

/// One row of the shell decomposition of the commutator: N1 tags the shell
/// of the time-derivative factor, (N2 >= N3 >= N4) the canonical multiset of
/// the three field shells; `contribution` includes the permutation
/// multiplicity so rows sum to the total.
struct BreakdownRow {
  ShellQuadruple shells;
  CaseLabel label;
  double contribution;
};

struct BreakdownTable {
  std::vector<BreakdownRow> rows;  // sorted by |contribution|, descending
  double total;                    // equals the sum of rows by construction
  double commutator;               // independent total for the row-sum check
  std::string csv() const;
};

/// Littlewood-Paley decomposition of the commutator over shell quadruples
/// (anchor ball + annuli covering the lattice). Errors out above `max_rows`
/// enumerated quadruples.
BreakdownTable increment_shell_breakdown(const Trajectory& traj,
                                         const SubInterval& J,
                                         const MultiplierProfile& prof,
                                         std::int64_t max_rows = 10000,
                                         const CaseConfig& cfg = {});

}  // namespace cwi
