#include "mtmlca/mlca.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "mtmlca/errors.hpp"

namespace mtmlca {

namespace {

constexpr std::uint64_t kInitStream = 11;
constexpr std::uint64_t kMarginalStream = 12;
constexpr std::uint64_t kFitStream = 13;

std::uint64_t nonempty_bundle_count(std::size_t m) {
  return m >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::kBaseline:
      return "baseline";
    case Method::kMtFront:
      return "mt-f";
    case Method::kMtRear:
      return "mt-r";
  }
  return "baseline";
}

Method method_from_string(const std::string& name) {
  if (name == "baseline") return Method::kBaseline;
  if (name == "mt-f") return Method::kMtFront;
  if (name == "mt-r") return Method::kMtRear;
  throw ConfigError("unknown method '" + name + "' (expected baseline, mt-f or mt-r)");
}

TrainConfig configure_method(Method method, const TrainConfig& base) {
  TrainConfig cfg = base;
  switch (method) {
    case Method::kBaseline:
      cfg.lambda = 0.0;
      cfg.sharing = SharingMode::kNone;
      cfg.inject_id = false;
      break;
    case Method::kMtFront:
      cfg.sharing = SharingMode::kFront;
      cfg.inject_id = true;
      break;
    case Method::kMtRear:
      cfg.sharing = SharingMode::kRear;
      cfg.inject_id = true;
      break;
  }
  return cfg;
}

void MlcaConfig::validate(int num_bidders, std::size_t num_items) const {
  if (q_init < 1) throw ConfigError("mlca.q_init must be >= 1");
  if (q_round < 1) throw ConfigError("mlca.q_round must be >= 1");
  if (q_init > q_max) throw ConfigError("mlca.q_init must not exceed mlca.q_max");
  if (static_cast<std::uint64_t>(q_init) > nonempty_bundle_count(num_items)) {
    throw ConfigError("mlca.q_init exceeds the number of nonempty bundles");
  }
  if (q_round > num_bidders) throw ConfigError("mlca.q_round must not exceed the number of bidders");
}

ReportSet initial_queries(const AuctionInstance& instance, int q_init, std::uint64_t seed) {
  const std::size_t m = instance.num_items();
  if (q_init < 0 || static_cast<std::uint64_t>(q_init) > nonempty_bundle_count(m)) {
    throw ConfigError("q_init exceeds the number of nonempty bundles");
  }
  ReportSet reports(instance.num_bidders(), m);
  for (int i = 0; i < instance.num_bidders(); ++i) {
    Rng rng = Rng::substream(seed, {kInitStream, static_cast<std::uint64_t>(i)});
    if (m <= 20) {
      // Index into the 2^m - 1 nonempty masks directly.
      for (auto idx : rng.sample_without_replacement(nonempty_bundle_count(m), static_cast<std::uint64_t>(q_init))) {
        const Bundle b = Bundle::from_mask(m, idx + 1);
        reports.add(i, b, report(instance, i, b));
      }
      continue;
    }
    while (reports.count(i) < static_cast<std::size_t>(q_init)) {
      Bundle b(m);
      for (std::size_t k = 0; k < m; ++k) {
        if (rng.next_u64() >> 63) b.set(k);
      }
      if (b.none() || reports.contains(i, b)) continue;
      reports.add(i, b, report(instance, i, b));
    }
  }
  return reports;
}

std::vector<int> marginal_sample(int num_bidders, int bidder, int q_round, Rng& rng) {
  if (bidder < 0 || bidder >= num_bidders) throw ArgumentError("bidder index out of range");
  if (q_round < 1 || q_round > num_bidders) throw ConfigError("q_round must lie in 1..n");
  std::vector<int> others;
  for (int j = 0; j < num_bidders; ++j) {
    if (j != bidder) others.push_back(j);
  }
  std::vector<int> out;
  for (auto idx : rng.sample_without_replacement(others.size(), static_cast<std::uint64_t>(q_round - 1))) {
    out.push_back(others[idx]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

QueryProfile select_queries(std::vector<MvnnParams> models, const std::vector<int>& bidders,
                            const ReportSet& reports, const SolverOptions& solver_options) {
  if (models.size() != bidders.size()) throw ArgumentError("one model per bidder is required");
  const int n = reports.num_bidders();
  const std::size_t m = reports.num_items();

  QueryProfile profile;
  const ValueSumSolver solver = ValueSumSolver::for_models(models, bidders, n, solver_options);
  profile.bidders = solver.bidders();
  profile.queries.assign(static_cast<std::size_t>(n), std::nullopt);

  const WdpResult first = solver.solve();
  profile.stats.nodes += first.stats.nodes;
  profile.stats.prunes += first.stats.prunes;

  for (int i : profile.bidders) {
    const Bundle& proposal = first.allocation.columns[static_cast<std::size_t>(i)];
    if (!proposal.none() && !reports.contains(i, proposal)) {
      profile.queries[static_cast<std::size_t>(i)] = proposal;
      continue;
    }
    if (reports.count(i) >= nonempty_bundle_count(m)) {
      profile.skipped.push_back(i);
      continue;
    }
    ExclusionSet exclusions(n);
    exclusions.forbid(i, Bundle(m));
    for (const auto& r : reports.of(i)) exclusions.forbid(i, r.bundle);
    try {
      const WdpResult resolved = solver.solve(&exclusions);
      profile.stats.nodes += resolved.stats.nodes;
      profile.stats.prunes += resolved.stats.prunes;
      profile.queries[static_cast<std::size_t>(i)] = resolved.allocation.columns[static_cast<std::size_t>(i)];
    } catch (const ExhaustionError&) {
      profile.skipped.push_back(i);
    }
  }

  // Keep models aligned with the sorted bidder order.
  std::vector<std::size_t> order(bidders.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bidders[a] < bidders[b]; });
  for (auto k : order) profile.models.push_back(std::move(models[k]));
  return profile;
}

QueryProfile next_queries(const std::vector<int>& bidders, const ReportSet& reports, const TrainConfig& config,
                          std::uint64_t fit_stream_root, const SolverOptions& solver) {
  std::vector<int> sorted = bidders;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::vector<Sample>> samples;
  for (int i : sorted) {
    std::vector<Sample> list;
    for (const auto& r : reports.of(i)) list.push_back({r.bundle, r.value});
    samples.push_back(std::move(list));
  }
  FitGroup group = make_fit_group(sorted, std::move(samples), static_cast<int>(reports.num_items()), config,
                                  fit_stream_root);
  const FitDiagnostics diag = mt_fit(group, config);
  QueryProfile profile = select_queries(std::move(group.models), sorted, reports, solver);
  profile.fit = diag;
  return profile;
}

VcgOutcome vcg_outcome(const ReportSet& reports, const SolverOptions& solver) {
  const int n = reports.num_bidders();
  VcgOutcome out;
  out.main = solve_reported_wdp(reports, solver);
  out.payments.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<int> others;
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    const WdpResult marginal = solve_reported_wdp(reports, others, solver);
    double others_at_main = 0.0;
    for (int j : others) {
      const auto& col = out.main.allocation.columns[static_cast<std::size_t>(j)];
      if (!col.none()) others_at_main += *reports.value_of(j, col);
    }
    double p = marginal.welfare - others_at_main;
    // Both terms are exact optima up to summation order.
    if (p < 0.0 && p > -1e-9) p = 0.0;
    out.payments[static_cast<std::size_t>(i)] = p;
  }
  return out;
}

std::vector<double> vcg_payments(const ReportSet& reports, const SolverOptions& solver) {
  return vcg_outcome(reports, solver).payments;
}

AuctionOutcome run_mlca(const AuctionInstance& instance, Method method, const MlcaConfig& mlca,
                        const TrainConfig& base, const RunOptions& options) {
  return run_mlca_with(instance, mlca, configure_method(method, base), options);
}

AuctionOutcome run_mlca_with(const AuctionInstance& instance, const MlcaConfig& mlca, const TrainConfig& train,
                             const RunOptions& options) {
  const int n = instance.num_bidders();
  const std::size_t m = instance.num_items();
  mlca.validate(n, m);
  train.validate();

  AuctionOutcome outcome;
  outcome.reports = initial_queries(instance, mlca.q_init, mlca.seed);
  ReportSet& reports = outcome.reports;

  std::vector<int> everyone(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) everyone[static_cast<std::size_t>(i)] = i;

  for (int round = 1; round <= mlca.rounds(); ++round) {
    RoundTrace trace;
    trace.round = round;
    const auto round_key = static_cast<std::uint64_t>(round);
    std::vector<std::vector<Bundle>> pending(static_cast<std::size_t>(n));
    auto propose = [&](int i, const QueryProfile& profile) {
      const auto& q = profile.queries[static_cast<std::size_t>(i)];
      if (!q) return;
      auto& list = pending[static_cast<std::size_t>(i)];
      if (std::find(list.begin(), list.end(), *q) == list.end()) list.push_back(*q);
    };

    // Marginal economies; within a round NextQueries(N \ {j}, R_{-j}) does not depend on i.
    std::map<int, QueryProfile> marginal_cache;
    for (int i = 0; i < n; ++i) {
      Rng rng = Rng::substream(mlca.seed, {kMarginalStream, round_key, static_cast<std::uint64_t>(i)});
      for (int j : marginal_sample(n, i, mlca.q_round, rng)) {
        auto it = marginal_cache.find(j);
        if (it == marginal_cache.end()) {
          std::vector<int> others;
          for (int b = 0; b < n; ++b) {
            if (b != j) others.push_back(b);
          }
          const std::uint64_t root =
              Rng::derive_seed(mlca.seed, {kFitStream, round_key, static_cast<std::uint64_t>(j)});
          it = marginal_cache.emplace(j, next_queries(others, reports, train, root, options.solver)).first;
          trace.fits.push_back(it->second.fit);
          trace.solver_nodes += it->second.stats.nodes;
        }
        propose(i, it->second);
      }
    }

    const std::uint64_t main_root =
        Rng::derive_seed(mlca.seed, {kFitStream, round_key, static_cast<std::uint64_t>(n)});
    const QueryProfile main = next_queries(everyone, reports, train, main_root, options.solver);
    trace.fits.push_back(main.fit);
    trace.solver_nodes += main.stats.nodes;
    trace.skipped = main.skipped;
    for (int i = 0; i < n; ++i) propose(i, main);
    if (options.test_set != nullptr) trace.mape = mape(main.models, *options.test_set);

    trace.new_reports.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i < n; ++i) {
      for (const auto& b : pending[static_cast<std::size_t>(i)]) {
        if (reports.add(i, b, report(instance, i, b))) trace.new_reports[static_cast<std::size_t>(i)].push_back(b);
      }
    }
    trace.tentative_welfare = solve_reported_wdp(reports, options.solver).welfare;
    outcome.trace.push_back(std::move(trace));
    outcome.final_models = main.models;
  }

  VcgOutcome vcg = vcg_outcome(reports, options.solver);
  outcome.allocation = std::move(vcg.main.allocation);
  outcome.reported_welfare = vcg.main.welfare;
  outcome.payments = std::move(vcg.payments);
  return outcome;
}

}  // namespace mtmlca
