#pragma once

#include "trussred/limit.hpp"
#include "trussred/model.hpp"

#include <cstddef>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace trussred {

struct ScenarioValue {
  std::vector<int> damaged;
  double lambda = 0.0;
};

/// Worst-case limit load factor over all damage patterns of a given size.
struct WorstCaseResult {
  int alpha = 0;
  double gamma = 0.0;
  double worst_lambda = 0.0;
  /// Objective of the robust problem, -worst_lambda.
  double f_value = 0.0;
  /// Evaluated scenarios in lexicographic order of their damaged index sets.
  std::vector<ScenarioValue> table;
  /// Indices into table of the scenarios tied with worst_lambda.
  std::vector<std::size_t> worst;
  /// True when enumeration stopped at the first unstable scenario.
  bool early_exit = false;
  /// LPs solved for this result; zero when served from a cache.
  long lp_solves = 0;

  std::size_t multiplicity() const { return worst.size(); }
};

struct WorstCaseOptions {
  double tie_rel = 1e-6;
  double tie_abs = 1e-9;
  bool early_exit = true;
  /// Start each scenario LP from the optimal basis of the intact design
  /// (one extra LP per evaluation).
  bool warm_start = true;
  lp::LpOptions lp;
};

/// True when lambda counts as tied with the minimum value worst.
bool is_tie(double lambda, double worst, const WorstCaseOptions& opts);

/// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k);

/// Memo of scenario tables keyed by (areas, alpha, gamma). Safe for
/// concurrent lookup and insertion.
class WorstCaseCache {
public:
  std::optional<std::vector<double>> find(const Vec& areas, int alpha, double gamma) const;
  void insert(const Vec& areas, int alpha, double gamma, std::vector<double> lambdas);
  std::size_t size() const;
  void clear();

private:
  static std::string key(const Vec& areas, int alpha, double gamma);

  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

/// Exact worst case over scenarios with at most alpha damaged members.
///
/// Realized areas are monotone in the soundness vector and the load factor
/// is monotone in the areas, so only patterns with exactly alpha damaged
/// members are enumerated. Scenario LPs run as a parallel map. With
/// opts.early_exit the scan stops at the first unstable scenario (lambda =
/// -inf); the returned table then holds exactly the scenarios up to and
/// including it, independent of thread scheduling.
WorstCaseResult worst_case(const GroundStructure& gs, const Vec& areas, int alpha, double gamma,
                           const WorstCaseOptions& opts = {}, WorstCaseCache* cache = nullptr);

/// Reference enumeration over every pattern with at most alpha damaged
/// members, sequential, no reduction and no early exit.
WorstCaseResult worst_case_oracle(const GroundStructure& gs, const Vec& areas, int alpha,
                                  double gamma, const WorstCaseOptions& opts = {});

struct RedundancyResult {
  /// The intact design already violates the allowance.
  bool nominal_violation = false;
  int alpha_hat = 0;
  /// Worst-case f value for alpha = 0, 1, ... as scanned.
  std::vector<double> f_by_alpha;
};

/// Largest alpha whose worst-case f value stays within h_c for every
/// alpha' <= alpha, scanning upward from zero.
RedundancyResult strong_redundancy(const GroundStructure& gs, const Vec& areas, double h_c,
                                   double gamma, const WorstCaseOptions& opts = {});

/// CSV with header damaged_member_ids,lambda,is_worst. Member ids inside a
/// row are separated by ';'.
std::string scenario_csv(const WorstCaseResult& result);

}  // namespace trussred
