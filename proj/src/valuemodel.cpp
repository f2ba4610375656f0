#include "mtmlca/valuemodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "mtmlca/errors.hpp"
#include "mtmlca/rng.hpp"

namespace mtmlca {

RegionLayout::RegionLayout(int regions, int blocks_per_region)
    : regions_(regions), blocks_(blocks_per_region) {
  if (regions < 1) throw ConfigError("regions must be positive");
  if (blocks_per_region < 1) throw ConfigError("blocks_per_region must be positive");
  if (num_items() > Bundle::kMaxItems) {
    throw ConfigError("layout has " + std::to_string(num_items()) + " items; at most " +
                      std::to_string(Bundle::kMaxItems) + " are supported");
  }
}

int RegionLayout::region_of(std::size_t item) const {
  if (item >= num_items()) throw ArgumentError("item index out of range");
  return static_cast<int>(item / static_cast<std::size_t>(blocks_));
}

int RegionLayout::distance(int a, int b) const {
  const int d = std::abs(a - b);
  return std::min(d, regions_ - d);
}

std::vector<int> RegionLayout::region_counts(const Bundle& bundle) const {
  if (bundle.size() != num_items()) throw ArgumentError("bundle length does not match layout");
  std::vector<int> counts(static_cast<std::size_t>(regions_), 0);
  for (std::size_t k = 0; k < num_items(); ++k) {
    if (bundle.test(k)) ++counts[static_cast<std::size_t>(region_of(k))];
  }
  return counts;
}

std::string to_string(BidderKind kind) {
  switch (kind) {
    case BidderKind::kLocal:
      return "local";
    case BidderKind::kRegional:
      return "regional";
    case BidderKind::kNational:
      return "national";
  }
  return "unknown";
}

void InstanceConfig::validate() const {
  if (regions < 1) throw ConfigError("instance.regions must be >= 1");
  if (blocks_per_region < 1) throw ConfigError("instance.blocks_per_region must be >= 1");
  if (n_local < 0) throw ConfigError("instance.n_local must be >= 0");
  if (n_regional < 0) throw ConfigError("instance.n_regional must be >= 0");
  if (n_national < 0) throw ConfigError("instance.n_national must be >= 0");
  if (num_bidders() < 1) throw ConfigError("instance must contain at least one bidder");
  if (!(rho_corr >= 0.0 && rho_corr <= 1.0)) throw ConfigError("instance.rho_corr must lie in [0, 1]");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("instance.beta must lie in (0, 1)");
  if (!(delta >= 0.0)) throw ConfigError("instance.delta must be >= 0");
  auto check_range = [](const Range& r, const char* name) {
    if (!(r.lo >= 0.0 && r.hi >= r.lo)) {
      throw ConfigError(std::string("instance.") + name + " must satisfy 0 <= lo <= hi");
    }
  };
  check_range(gamma_local, "gamma_local");
  check_range(gamma_regional, "gamma_regional");
  check_range(gamma_national, "gamma_national");
  if (static_cast<std::size_t>(regions) * static_cast<std::size_t>(blocks_per_region) >
      Bundle::kMaxItems) {
    throw ConfigError("instance has more than " + std::to_string(Bundle::kMaxItems) + " items");
  }
}

namespace {

constexpr std::uint64_t kArchetypeStream = 1;
constexpr std::uint64_t kBidderStream = 2;

std::uint64_t kind_key(BidderKind kind) { return static_cast<std::uint64_t>(kind); }

const Range& gamma_range(const InstanceConfig& config, BidderKind kind) {
  switch (kind) {
    case BidderKind::kLocal:
      return config.gamma_local;
    case BidderKind::kRegional:
      return config.gamma_regional;
    case BidderKind::kNational:
      break;
  }
  return config.gamma_national;
}

double saturation(int count, double beta) { return 1.0 - std::pow(beta, count); }

}  // namespace

AuctionInstance generate_instance(const InstanceConfig& config, std::uint64_t seed) {
  config.validate();
  AuctionInstance instance;
  instance.layout = RegionLayout(config.regions, config.blocks_per_region);
  instance.seed = seed;
  instance.rho_corr = config.rho_corr;

  const int regions = config.regions;
  auto add_bidders = [&](BidderKind kind, int count) {
    const Range& range = gamma_range(config, kind);
    Rng arch_rng = Rng::substream(seed, {kArchetypeStream, kind_key(kind)});
    const double gamma_arch = arch_rng.uniform(range.lo, range.hi);
    for (int idx = 0; idx < count; ++idx) {
      Rng rng = Rng::substream(seed, {kBidderStream, kind_key(kind), static_cast<std::uint64_t>(idx)});
      ArchetypeParams p;
      p.kind = kind;
      p.beta = config.beta;
      const double gamma_ind = rng.uniform(range.lo, range.hi);
      p.gamma = (1.0 - config.rho_corr) * gamma_ind + config.rho_corr * gamma_arch;
      switch (kind) {
        case BidderKind::kLocal: {
          const auto size = static_cast<std::uint64_t>(std::max(1, regions / 4));
          for (auto r : rng.sample_without_replacement(static_cast<std::uint64_t>(regions), size)) {
            p.interest.push_back(static_cast<int>(r));
          }
          std::sort(p.interest.begin(), p.interest.end());
          break;
        }
        case BidderKind::kRegional:
          p.headquarters = static_cast<int>(rng.below(static_cast<std::uint64_t>(regions)));
          break;
        case BidderKind::kNational:
          p.delta = config.delta;
          break;
      }
      instance.bidders.push_back(std::move(p));
    }
  };
  add_bidders(BidderKind::kLocal, config.n_local);
  add_bidders(BidderKind::kRegional, config.n_regional);
  add_bidders(BidderKind::kNational, config.n_national);
  return instance;
}

double archetype_value(const ArchetypeParams& params, const RegionLayout& layout,
                       const Bundle& bundle) {
  const std::vector<int> counts = layout.region_counts(bundle);
  const int regions = layout.regions();
  switch (params.kind) {
    case BidderKind::kLocal: {
      double sum = 0.0;
      for (int r : params.interest) sum += saturation(counts[static_cast<std::size_t>(r)], params.beta);
      return params.gamma * sum;
    }
    case BidderKind::kRegional: {
      double sum = 0.0;
      for (int r = 0; r < regions; ++r) {
        sum += saturation(counts[static_cast<std::size_t>(r)], params.beta) /
               (1.0 + layout.distance(params.headquarters, r));
      }
      return params.gamma * sum;
    }
    case BidderKind::kNational: {
      double sum = 0.0;
      int covered = 0;
      for (int r = 0; r < regions; ++r) {
        const int c = counts[static_cast<std::size_t>(r)];
        sum += saturation(c, params.beta);
        if (c >= 1) ++covered;
      }
      const double coverage = 1.0 + params.delta * covered / regions;
      return params.gamma * coverage * (sum / regions);
    }
  }
  return 0.0;
}

double true_value(const AuctionInstance& instance, int bidder, const Bundle& bundle) {
  if (bidder < 0 || bidder >= instance.num_bidders()) {
    throw ArgumentError("bidder index " + std::to_string(bidder) + " out of range");
  }
  return archetype_value(instance.bidders[static_cast<std::size_t>(bidder)], instance.layout, bundle);
}

double report(const AuctionInstance& instance, int bidder, const Bundle& bundle) {
  return true_value(instance, bidder, bundle);
}

}  // namespace mtmlca
