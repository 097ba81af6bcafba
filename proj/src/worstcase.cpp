#include "trussred/worstcase.hpp"

#include "trussred/format.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace trussred {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double scenario_lambda(const GroundStructure& gs, const Vec& areas,
                       const std::vector<int>& damaged, double gamma,
                       const lp::LpOptions& lp_opts, const lp::LpBasis* warm) {
  Vec realized = areas;
  for (int i : damaged) realized[i] *= gamma;
  return limit_load_factor(gs, realized, lp_opts, warm).lambda;
}

// Fills table/worst/worst_lambda from per-scenario values.
void assemble(WorstCaseResult& r, const std::vector<std::vector<int>>& scenarios,
              const std::vector<double>& lambdas, const WorstCaseOptions& opts) {
  r.table.clear();
  r.table.reserve(lambdas.size());
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < lambdas.size(); ++s) {
    r.table.push_back(ScenarioValue{scenarios[s], lambdas[s]});
    worst = std::min(worst, lambdas[s]);
  }
  r.worst_lambda = worst;
  r.f_value = -worst;
  r.worst.clear();
  for (std::size_t s = 0; s < r.table.size(); ++s)
    if (is_tie(r.table[s].lambda, worst, opts)) r.worst.push_back(s);
}

void check_inputs(const GroundStructure& gs, const Vec& areas, int alpha, double gamma) {
  if (areas.size() != gs.num_members()) throw ModelError("area vector size does not match members");
  if (alpha < 0 || alpha > gs.num_members()) {
    throw ModelError("alpha must lie in [0, " + std::to_string(gs.num_members()) + "]");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ModelError("damage degree must lie in [0, 1)");
}

}  // namespace

bool is_tie(double lambda, double worst, const WorstCaseOptions& opts) {
  if (std::isinf(worst) || std::isinf(lambda)) return lambda == worst;
  return lambda - worst <= std::max(opts.tie_rel * std::abs(worst), opts.tie_abs);
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::string WorstCaseCache::key(const Vec& areas, int alpha, double gamma) {
  std::string k(sizeof(double) * (areas.size() + 1) + sizeof(int), '\0');
  char* p = k.data();
  std::memcpy(p, areas.data(), sizeof(double) * areas.size());
  p += sizeof(double) * areas.size();
  std::memcpy(p, &gamma, sizeof gamma);
  std::memcpy(p + sizeof gamma, &alpha, sizeof alpha);
  return k;
}

std::optional<std::vector<double>> WorstCaseCache::find(const Vec& areas, int alpha,
                                                        double gamma) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key(areas, alpha, gamma));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void WorstCaseCache::insert(const Vec& areas, int alpha, double gamma,
                            std::vector<double> lambdas) {
  std::lock_guard lock(mutex_);
  entries_.try_emplace(key(areas, alpha, gamma), std::move(lambdas));
}

std::size_t WorstCaseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void WorstCaseCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

WorstCaseResult worst_case(const GroundStructure& gs, const Vec& areas, int alpha, double gamma,
                           const WorstCaseOptions& opts, WorstCaseCache* cache) {
  check_inputs(gs, areas, alpha, gamma);
  const auto scenarios = combinations(gs.num_members(), alpha);
  WorstCaseResult r;
  r.alpha = alpha;
  r.gamma = gamma;

  if (cache) {
    if (auto hit = cache->find(areas, alpha, gamma)) {
      r.early_exit = hit->size() < scenarios.size();
      assemble(r, scenarios, *hit, opts);
      return r;
    }
  }

  const long n = static_cast<long>(scenarios.size());
  std::vector<double> lambdas(n, std::numeric_limits<double>::quiet_NaN());
  long solved = 0;
  lp::LpBasis intact;
  if (opts.warm_start && alpha > 0) {
    intact = limit_load_factor(gs, areas, opts.lp).basis;
    ++solved;
  }
  const lp::LpBasis* warm = intact.empty() ? nullptr : &intact;
  // Scenarios are evaluated in fixed-size blocks so that the amount of work
  // done before an early exit does not depend on the thread count.
  constexpr long kBlock = 32;
  long first_unstable = n;
  for (long begin = 0; begin < n && first_unstable == n; begin += kBlock) {
    const long end = std::min(n, begin + kBlock);
    detail::parallel_for(begin, end, [&](long s) {
      lambdas[s] = scenario_lambda(gs, areas, scenarios[s], gamma, opts.lp, warm);
    });
    solved += end - begin;
    if (!opts.early_exit) continue;
    for (long s = begin; s < end; ++s) {
      if (lambdas[s] == kNegInf) {
        first_unstable = s;
        break;
      }
    }
  }

  if (first_unstable < n) {
    lambdas.resize(first_unstable + 1);
    r.early_exit = true;
  }
  r.lp_solves = solved;
  assemble(r, scenarios, lambdas, opts);
  if (cache) cache->insert(areas, alpha, gamma, std::move(lambdas));
  return r;
}

WorstCaseResult worst_case_oracle(const GroundStructure& gs, const Vec& areas, int alpha,
                                  double gamma, const WorstCaseOptions& opts) {
  check_inputs(gs, areas, alpha, gamma);
  const int m = gs.num_members();
  if (m > 30) throw ModelError("worst_case_oracle is limited to 30 members");
  std::vector<std::vector<int>> scenarios;
  std::vector<double> lambdas;
  // Every soundness vector t with ||1 - t||_1 <= alpha, enumerated as bit masks
  // and then sorted into the same lexicographic order worst_case uses.
  for (unsigned long mask = 0; mask < (1UL << m); ++mask) {
    if (__builtin_popcountl(mask) > alpha) continue;
    std::vector<int> damaged;
    for (int i = 0; i < m; ++i)
      if (mask & (1UL << i)) damaged.push_back(i);
    scenarios.push_back(std::move(damaged));
  }
  std::sort(scenarios.begin(), scenarios.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  for (const auto& sc : scenarios) {
    DamageScenario t = DamageScenario::from_damaged(m, sc, gamma);
    lambdas.push_back(limit_load_factor(gs, apply_scenario(areas, t), opts.lp).lambda);
  }
  WorstCaseResult r;
  r.alpha = alpha;
  r.gamma = gamma;
  r.lp_solves = static_cast<long>(lambdas.size());
  assemble(r, scenarios, lambdas, opts);
  return r;
}

RedundancyResult strong_redundancy(const GroundStructure& gs, const Vec& areas, double h_c,
                                   double gamma, const WorstCaseOptions& opts) {
  RedundancyResult out;
  for (int alpha = 0; alpha <= gs.num_members(); ++alpha) {
    const double f = worst_case(gs, areas, alpha, gamma, opts).f_value;
    out.f_by_alpha.push_back(f);
    if (!(f <= h_c)) {
      if (alpha == 0) out.nominal_violation = true;
      out.alpha_hat = alpha - 1;
      return out;
    }
  }
  out.alpha_hat = gs.num_members();
  return out;
}

std::string scenario_csv(const WorstCaseResult& result) {
  std::ostringstream out;
  out << "damaged_member_ids,lambda,is_worst\n";
  std::size_t next_worst = 0;
  for (std::size_t s = 0; s < result.table.size(); ++s) {
    const ScenarioValue& v = result.table[s];
    for (std::size_t k = 0; k < v.damaged.size(); ++k) out << (k ? ";" : "") << v.damaged[k];
    const bool worst = next_worst < result.worst.size() && result.worst[next_worst] == s;
    if (worst) ++next_worst;
    out << ',' << format_number(v.lambda, 10) << ',' << (worst ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace trussred
