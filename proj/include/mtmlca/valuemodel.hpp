#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mtmlca/bundle.hpp"

namespace mtmlca {

/// Items are grouped into regions laid out on a cycle. Items of region r are
/// the contiguous block [r*B, (r+1)*B).
class RegionLayout {
 public:
  RegionLayout(int regions, int blocks_per_region);

  int regions() const noexcept { return regions_; }
  int blocks_per_region() const noexcept { return blocks_; }
  std::size_t num_items() const noexcept { return static_cast<std::size_t>(regions_) * blocks_; }
  int region_of(std::size_t item) const;
  /// Hops between regions a and b around the cycle.
  int distance(int a, int b) const;
  /// Items of `bundle` in each region.
  std::vector<int> region_counts(const Bundle& bundle) const;

 private:
  int regions_;
  int blocks_;
};

enum class BidderKind { kLocal, kRegional, kNational };

std::string to_string(BidderKind kind);

struct ArchetypeParams {
  BidderKind kind = BidderKind::kLocal;
  double gamma = 0.0;
  double beta = 0.5;
  double delta = 0.0;        // coverage bonus, national only
  std::vector<int> interest;  // local only, ascending region indices
  int headquarters = 0;       // regional only
};

struct Range {
  double lo;
  double hi;
};

struct InstanceConfig {
  int regions = 4;
  int blocks_per_region = 3;
  int n_local = 1;
  int n_regional = 1;
  int n_national = 1;
  double rho_corr = 0.5;
  double beta = 0.5;
  double delta = 3.0;
  Range gamma_local{50.0, 100.0};
  Range gamma_regional{100.0, 200.0};
  Range gamma_national{300.0, 600.0};

  int num_bidders() const { return n_local + n_regional + n_national; }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Generated bidder population. Immutable after generation; evaluation is
/// pure, so instances may be shared across threads.
struct AuctionInstance {
  RegionLayout layout{1, 1};
  std::vector<ArchetypeParams> bidders;  // locals, then regionals, then nationals
  std::uint64_t seed = 0;
  double rho_corr = 0.0;

  int num_bidders() const noexcept { return static_cast<int>(bidders.size()); }
  std::size_t num_items() const noexcept { return layout.num_items(); }
};

/// Deterministic in (config, seed). Each bidder draws from a substream keyed
/// by (seed, kind, index within kind), so adding bidders of any kind never
/// changes the existing ones.
AuctionInstance generate_instance(const InstanceConfig& config, std::uint64_t seed);

/// Value of `bundle` to `bidder` under the archetype closed forms. Zero on the
/// empty bundle and monotone under inclusion.
double true_value(const AuctionInstance& instance, int bidder, const Bundle& bundle);

/// What a bidder reports for a value query. Bidders are truthful here, so this
/// equals true_value; it is the hook for other reporting strategies.
double report(const AuctionInstance& instance, int bidder, const Bundle& bundle);

/// Evaluates an archetype directly (used for hand-built bidders in tests).
double archetype_value(const ArchetypeParams& params, const RegionLayout& layout,
                       const Bundle& bundle);

}  // namespace mtmlca
