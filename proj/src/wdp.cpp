#include "mtmlca/wdp.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <string>

#include "mtmlca/errors.hpp"

namespace mtmlca {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Hard ceiling for the subset DP whatever the options say: tables are 2^m.
constexpr std::size_t kMaxDpItems = 24;

bool use_dp(const SolverOptions& options, std::size_t num_items) {
  switch (options.engine) {
    case SolverEngine::kSubsetDp:
      if (num_items > kMaxDpItems) {
        throw CapacityError("subset DP supports at most " + std::to_string(kMaxDpItems) + " items");
      }
      return true;
    case SolverEngine::kBranchAndBound:
      return false;
    case SolverEngine::kAuto:
      break;
  }
  return num_items <= std::min(options.dp_item_limit, kMaxDpItems);
}

std::vector<int> normalized_bidders(std::vector<int> bidders, int num_bidders) {
  std::sort(bidders.begin(), bidders.end());
  bidders.erase(std::unique(bidders.begin(), bidders.end()), bidders.end());
  for (int b : bidders) {
    if (b < 0 || b >= num_bidders) throw ArgumentError("bidder index " + std::to_string(b) + " out of range");
  }
  return bidders;
}

}  // namespace

// ---------------------------------------------------------------------------
// Allocation / ReportSet / ExclusionSet

Allocation Allocation::empty(int num_bidders, std::size_t num_items) {
  Allocation a;
  a.columns.assign(static_cast<std::size_t>(num_bidders), Bundle(num_items));
  return a;
}

bool Allocation::is_feasible() const {
  if (columns.empty()) return true;
  Bundle used(columns.front().size());
  for (const auto& c : columns) {
    if (c.size() != used.size() || c.intersects(used)) return false;
    used |= c;
  }
  return true;
}

ReportSet::ReportSet(int num_bidders, std::size_t num_items)
    : reports_(static_cast<std::size_t>(num_bidders)), num_items_(num_items) {
  if (num_bidders < 0) throw ArgumentError("bidder count must be nonnegative");
}

void ReportSet::check_bidder(int bidder) const {
  if (bidder < 0 || bidder >= num_bidders()) {
    throw ArgumentError("bidder index " + std::to_string(bidder) + " out of range");
  }
}

bool ReportSet::add(int bidder, const Bundle& bundle, double value) {
  check_bidder(bidder);
  if (bundle.size() != num_items_) throw ArgumentError("report bundle length mismatch");
  if (!(value >= 0.0)) throw ArgumentError("reported values must be nonnegative");
  if (contains(bidder, bundle)) return false;
  reports_[static_cast<std::size_t>(bidder)].push_back({bundle, value});
  return true;
}

bool ReportSet::contains(int bidder, const Bundle& bundle) const { return value_of(bidder, bundle).has_value(); }

std::optional<double> ReportSet::value_of(int bidder, const Bundle& bundle) const {
  for (const auto& r : of(bidder)) {
    if (r.bundle == bundle) return r.value;
  }
  return std::nullopt;
}

const std::vector<Report>& ReportSet::of(int bidder) const {
  check_bidder(bidder);
  return reports_[static_cast<std::size_t>(bidder)];
}

void ExclusionSet::forbid(int bidder, const Bundle& bundle) {
  if (bidder < 0) throw ArgumentError("bidder index out of range");
  if (static_cast<std::size_t>(bidder) >= forbidden.size()) forbidden.resize(static_cast<std::size_t>(bidder) + 1);
  auto& list = forbidden[static_cast<std::size_t>(bidder)];
  if (std::find(list.begin(), list.end(), bundle) == list.end()) list.push_back(bundle);
}

bool ExclusionSet::allows(int bidder, const Bundle& bundle) const {
  if (bidder < 0 || static_cast<std::size_t>(bidder) >= forbidden.size()) return true;
  const auto& list = forbidden[static_cast<std::size_t>(bidder)];
  return std::find(list.begin(), list.end(), bundle) == list.end();
}

// ---------------------------------------------------------------------------
// Reported WDP

namespace {

WdpResult reported_dp(const ReportSet& reports, const std::vector<int>& active) {
  const std::size_t m = reports.num_items();
  const std::size_t space = std::size_t{1} << m;
  const std::uint64_t full = space - 1;

  std::vector<double> prev(space, 0.0);
  std::vector<double> cur(space);
  std::vector<std::vector<std::int32_t>> choice(active.size(), std::vector<std::int32_t>(space, -1));
  SolveStats stats;

  for (std::size_t k = 0; k < active.size(); ++k) {
    const auto& list = reports.of(active[k]);
    std::vector<std::uint64_t> masks;
    masks.reserve(list.size());
    for (const auto& r : list) masks.push_back(r.bundle.to_mask());
    for (std::uint64_t s = 0; s < space; ++s) {
      double best = prev[s];
      std::int32_t pick = -1;
      for (std::size_t r = 0; r < list.size(); ++r) {
        ++stats.nodes;
        if ((masks[r] & ~s) != 0) continue;
        const double cand = prev[s ^ masks[r]] + list[r].value;
        if (cand > best) {
          best = cand;
          pick = static_cast<std::int32_t>(r);
        }
      }
      cur[s] = best;
      choice[k][s] = pick;
    }
    std::swap(prev, cur);
  }

  WdpResult result;
  result.allocation = Allocation::empty(reports.num_bidders(), m);
  std::uint64_t s = full;
  for (std::size_t k = active.size(); k-- > 0;) {
    const std::int32_t pick = choice[k][s];
    if (pick < 0) continue;
    const auto& rep = reports.of(active[k])[static_cast<std::size_t>(pick)];
    result.allocation.columns[static_cast<std::size_t>(active[k])] = rep.bundle;
    s ^= rep.bundle.to_mask();
  }
  result.stats = stats;
  return result;
}

class ReportedSearch {
 public:
  ReportedSearch(const ReportSet& reports, const std::vector<int>& active) : reports_(reports), active_(active) {
    suffix_max_.assign(active.size() + 1, 0.0);
    for (std::size_t k = active.size(); k-- > 0;) {
      double best = 0.0;
      for (const auto& r : reports.of(active[k])) best = std::max(best, r.value);
      suffix_max_[k] = suffix_max_[k + 1] + best;
    }
    choice_.assign(active.size(), -1);
    best_choice_ = choice_;
  }

  WdpResult run() {
    dfs(0, Bundle(reports_.num_items()), 0.0);
    WdpResult result;
    result.allocation = Allocation::empty(reports_.num_bidders(), reports_.num_items());
    for (std::size_t k = 0; k < active_.size(); ++k) {
      if (best_choice_[k] < 0) continue;
      result.allocation.columns[static_cast<std::size_t>(active_[k])] =
          reports_.of(active_[k])[static_cast<std::size_t>(best_choice_[k])].bundle;
    }
    result.stats = stats_;
    return result;
  }

 private:
  void dfs(std::size_t k, const Bundle& used, double value) {
    ++stats_.nodes;
    if (k == active_.size()) {
      if (value > incumbent_) {
        incumbent_ = value;
        best_choice_ = choice_;
      }
      return;
    }
    if (value + suffix_max_[k] <= incumbent_) {
      ++stats_.prunes;
      return;
    }
    const auto& list = reports_.of(active_[k]);
    for (std::size_t r = 0; r < list.size(); ++r) {
      if (list[r].bundle.intersects(used)) continue;
      choice_[k] = static_cast<int>(r);
      dfs(k + 1, used | list[r].bundle, value + list[r].value);
    }
    choice_[k] = -1;
    dfs(k + 1, used, value);
  }

  const ReportSet& reports_;
  const std::vector<int>& active_;
  std::vector<double> suffix_max_;
  std::vector<int> choice_;
  std::vector<int> best_choice_;
  double incumbent_ = 0.0;  // the all-empty allocation
  SolveStats stats_;
};

}  // namespace

WdpResult solve_reported_wdp(const ReportSet& reports, const std::vector<int>& active, const SolverOptions& options) {
  const std::vector<int> bidders = normalized_bidders(active, reports.num_bidders());
  WdpResult result = use_dp(options, reports.num_items()) ? reported_dp(reports, bidders)
                                                          : ReportedSearch(reports, bidders).run();
  double welfare = 0.0;
  for (int b : bidders) {
    const auto& col = result.allocation.columns[static_cast<std::size_t>(b)];
    if (col.none()) continue;
    welfare += *reports.value_of(b, col);
  }
  result.welfare = welfare;
  return result;
}

WdpResult solve_reported_wdp(const ReportSet& reports, const SolverOptions& options) {
  std::vector<int> all(static_cast<std::size_t>(reports.num_bidders()));
  for (int i = 0; i < reports.num_bidders(); ++i) all[static_cast<std::size_t>(i)] = i;
  return solve_reported_wdp(reports, all, options);
}

// ---------------------------------------------------------------------------
// Sum of monotone value functions

double monotone_upper_bound(std::span<const ValueOracle> values, std::span<const Bundle> assigned,
                            const Bundle& unassigned) {
  if (values.size() != assigned.size()) throw ArgumentError("one partial column per value function is required");
  double bound = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) bound += values[k](assigned[k] | unassigned);
  return bound;
}

ValueSumSolver::ValueSumSolver(std::size_t num_items, int num_bidders, std::vector<int> bidders,
                               std::vector<ValueOracle> values, const SolverOptions& options)
    : num_items_(num_items), num_bidders_(num_bidders), values_(std::move(values)), options_(options) {
  if (bidders.size() != values_.size()) throw ArgumentError("one value function per bidder is required");
  if (bidders.empty()) throw ArgumentError("the bidder subset must be nonempty");
  // Keep oracles aligned with the sorted bidder order.
  std::vector<std::size_t> order(bidders.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bidders[a] < bidders[b]; });
  std::vector<ValueOracle> sorted_values;
  for (auto k : order) {
    bidders_.push_back(bidders[k]);
    sorted_values.push_back(values_[k]);
  }
  values_ = std::move(sorted_values);
  if (normalized_bidders(bidders_, num_bidders_).size() != bidders_.size()) {
    throw ArgumentError("bidder subset contains duplicates");
  }

  if (use_dp(options_, num_items_)) {
    const std::size_t space = std::size_t{1} << num_items_;
    tables_.assign(values_.size(), std::vector<double>(space));
    for (std::size_t k = 0; k < values_.size(); ++k) {
      for (std::uint64_t mask = 0; mask < space; ++mask) {
        tables_[k][mask] = values_[k](Bundle::from_mask(num_items_, mask));
      }
    }
  }
}

ValueSumSolver ValueSumSolver::for_models(std::span<const MvnnParams> models, std::vector<int> bidders,
                                          int num_bidders, const SolverOptions& options) {
  if (models.size() != bidders.size()) throw ArgumentError("one model per bidder is required");
  if (models.empty()) throw ArgumentError("the bidder subset must be nonempty");
  const auto m = static_cast<std::size_t>(models.front().input_dim());
  for (const auto& model : models) {
    if (!satisfies_constraints(model)) throw ArgumentError("model violates the monotone-network constraints");
    if (static_cast<std::size_t>(model.input_dim()) != m) throw ArgumentError("models disagree on item count");
  }

  ValueSumSolver solver;
  solver.num_items_ = m;
  solver.num_bidders_ = num_bidders;
  solver.options_ = options;

  std::vector<std::size_t> order(bidders.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bidders[a] < bidders[b]; });
  for (auto k : order) {
    solver.bidders_.push_back(bidders[k]);
    auto model = std::make_shared<const MvnnParams>(models[k]);
    solver.values_.push_back([model](const Bundle& b) { return forward(*model, b); });
  }
  if (normalized_bidders(solver.bidders_, num_bidders).size() != solver.bidders_.size()) {
    throw ArgumentError("bidder subset contains duplicates");
  }

  if (use_dp(options, m)) {
    const std::size_t space = std::size_t{1} << m;
    Eigen::MatrixXd inputs(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(space));
    for (std::uint64_t mask = 0; mask < space; ++mask) {
      for (std::size_t item = 0; item < m; ++item) {
        inputs(static_cast<Eigen::Index>(item), static_cast<Eigen::Index>(mask)) = ((mask >> item) & 1U) ? 1.0 : 0.0;
      }
    }
    for (auto k : order) {
      const auto& model = models[k];
      const Eigen::RowVectorXd raw = forward_raw_batch(model, inputs);
      std::vector<double> table(space);
      for (std::size_t mask = 0; mask < space; ++mask) table[mask] = model.scale * raw(static_cast<Eigen::Index>(mask));
      solver.tables_.push_back(std::move(table));
    }
  }
  return solver;
}

double ValueSumSolver::objective(const Allocation& allocation) const {
  double total = 0.0;
  for (std::size_t k = 0; k < bidders_.size(); ++k) {
    const auto& col = allocation.columns[static_cast<std::size_t>(bidders_[k])];
    total += tables_.empty() ? values_[k](col) : tables_[k][col.to_mask()];
  }
  return total;
}

WdpResult ValueSumSolver::solve(const ExclusionSet* exclusions) const {
  WdpResult result = tables_.empty() ? solve_branch_and_bound(exclusions) : solve_dp(exclusions);
  result.welfare = objective(result.allocation);
  return result;
}

WdpResult ValueSumSolver::solve_dp(const ExclusionSet* exclusions) const {
  const std::size_t m = num_items_;
  const std::size_t space = std::size_t{1} << m;
  const std::uint64_t full = space - 1;
  SolveStats stats;

  std::vector<double> prev(space, 0.0);
  std::vector<double> cur(space);
  std::vector<std::vector<std::uint32_t>> choice(bidders_.size(), std::vector<std::uint32_t>(space));
  std::vector<double> values(space);

  for (std::size_t k = 0; k < bidders_.size(); ++k) {
    values = tables_[k];
    if (exclusions != nullptr && static_cast<std::size_t>(bidders_[k]) < exclusions->forbidden.size()) {
      for (const auto& bundle : exclusions->forbidden[static_cast<std::size_t>(bidders_[k])]) {
        values[bundle.to_mask()] = kNegInf;
      }
    }
    for (std::uint64_t s = 0; s < space; ++s) {
      double best = kNegInf;
      std::uint64_t pick = 0;
      // Submasks of s in decreasing order; first strict maximum wins.
      std::uint64_t t = s;
      while (true) {
        ++stats.nodes;
        const double cand = prev[s ^ t] + values[t];
        if (cand > best) {
          best = cand;
          pick = t;
        }
        if (t == 0) break;
        t = (t - 1) & s;
      }
      cur[s] = best;
      choice[k][s] = static_cast<std::uint32_t>(pick);
    }
    std::swap(prev, cur);
  }
  if (prev[full] == kNegInf) throw ExhaustionError("exclusions leave no feasible allocation");

  WdpResult result;
  result.allocation = Allocation::empty(num_bidders_, m);
  std::uint64_t s = full;
  for (std::size_t k = bidders_.size(); k-- > 0;) {
    const std::uint64_t t = choice[k][s];
    result.allocation.columns[static_cast<std::size_t>(bidders_[k])] = Bundle::from_mask(m, t);
    s ^= t;
  }
  result.stats = stats;
  return result;
}

namespace {

// Items in ascending order; each item goes to a bidder of I (ascending) or
// stays unsold. Incumbent updates on strict improvement only.
class ItemSearch {
 public:
  ItemSearch(std::size_t num_items, std::span<const ValueOracle> values, const std::vector<int>& bidders,
             const ExclusionSet* exclusions)
      : m_(num_items), values_(values), bidders_(bidders), exclusions_(exclusions) {
    assigned_.assign(values.size(), Bundle(num_items));
    suffix_.assign(num_items + 1, Bundle(num_items));
    for (std::size_t item = num_items; item-- > 0;) {
      suffix_[item] = suffix_[item + 1];
      suffix_[item].set(item);
    }
  }

  bool run() {
    dfs(0);
    return found_;
  }
  const std::vector<Bundle>& best() const { return best_; }
  const SolveStats& stats() const { return stats_; }

 private:
  void dfs(std::size_t item) {
    ++stats_.nodes;
    if (item == m_) {
      if (exclusions_ != nullptr) {
        for (std::size_t k = 0; k < bidders_.size(); ++k) {
          if (!exclusions_->allows(bidders_[k], assigned_[k])) return;
        }
      }
      double value = 0.0;
      for (std::size_t k = 0; k < values_.size(); ++k) value += values_[k](assigned_[k]);
      if (!found_ || value > incumbent_) {
        found_ = true;
        incumbent_ = value;
        best_ = assigned_;
      }
      return;
    }
    if (found_ && monotone_upper_bound(values_, assigned_, suffix_[item]) <= incumbent_) {
      ++stats_.prunes;
      return;
    }
    for (std::size_t k = 0; k < assigned_.size(); ++k) {
      assigned_[k].set(item);
      dfs(item + 1);
      assigned_[k].set(item, false);
    }
    dfs(item + 1);
  }

  std::size_t m_;
  std::span<const ValueOracle> values_;
  const std::vector<int>& bidders_;
  const ExclusionSet* exclusions_;
  std::vector<Bundle> assigned_;
  std::vector<Bundle> suffix_;
  std::vector<Bundle> best_;
  double incumbent_ = 0.0;
  bool found_ = false;
  SolveStats stats_;
};

}  // namespace

WdpResult ValueSumSolver::solve_branch_and_bound(const ExclusionSet* exclusions) const {
  ItemSearch search(num_items_, values_, bidders_, exclusions);
  if (!search.run()) throw ExhaustionError("exclusions leave no feasible allocation");
  WdpResult result;
  result.allocation = Allocation::empty(num_bidders_, num_items_);
  for (std::size_t k = 0; k < bidders_.size(); ++k) {
    result.allocation.columns[static_cast<std::size_t>(bidders_[k])] = search.best()[k];
  }
  result.stats = search.stats();
  return result;
}

WdpResult maximize_model_sum(std::span<const MvnnParams> models, const std::vector<int>& bidders, int num_bidders,
                             const ExclusionSet* exclusions, const SolverOptions& options) {
  return ValueSumSolver::for_models(models, bidders, num_bidders, options).solve(exclusions);
}

double social_welfare(const AuctionInstance& instance, const Allocation& allocation) {
  if (allocation.num_bidders() != instance.num_bidders()) throw ArgumentError("allocation has wrong bidder count");
  double total = 0.0;
  for (int i = 0; i < instance.num_bidders(); ++i) {
    total += true_value(instance, i, allocation.columns[static_cast<std::size_t>(i)]);
  }
  return total;
}

WdpResult optimal_true_welfare(const AuctionInstance& instance, const TrueWelfareOptions& options) {
  const std::size_t m = instance.num_items();
  if (m > options.max_items) {
    throw CapacityError("exact welfare search limited to " + std::to_string(options.max_items) + " items, layout has " +
                        std::to_string(m) + "; use fewer regions or blocks");
  }
  std::vector<int> bidders;
  std::vector<ValueOracle> values;
  for (int i = 0; i < instance.num_bidders(); ++i) {
    bidders.push_back(i);
    values.push_back([&instance, i](const Bundle& b) { return true_value(instance, i, b); });
  }
  ValueSumSolver solver(m, instance.num_bidders(), bidders, values, options.solver);
  WdpResult result = solver.solve();
  result.welfare = social_welfare(instance, result.allocation);
  return result;
}

}  // namespace mtmlca
