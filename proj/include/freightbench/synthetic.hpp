#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "freightbench/dataset.hpp"

namespace freightbench {

// Published consolidated weighted mode shares. The rounded figures add up to
// 1.0001, so they are normalized here to satisfy the simplex invariant.
std::array<double, kNumModes> survey_mode_shares();

// Calibration targets for the synthetic shipment generator.
struct SyntheticSpec {
  std::size_t n_records = 0;
  std::array<double, kNumModes> target_mode_shares = survey_mode_shares();
  std::uint64_t seed = 0;
  double noise_level = 0.3;  // 0 = well-separated classes, 1 = features carry no mode signal

  void validate() const;
};

// Draws shipments from mode-conditional distributions so the five modes are
// statistically learnable. The generative story (a modeling convenience, not
// a claim about real freight behavior):
//
//   mode  ~ target_mode_shares
//   z     ~ per-mode latent segment coin; for-hire truck is a two-segment
//           mixture (short-haul heavy vs long-haul light), which couples size
//           and distance and keeps the classes from being linearly separable
//   bands ~ per-mode (and per-segment) categorical profiles over the size /
//           value / distance bands; raw values uniform within the drawn band
//   other categoricals ~ per-mode profiles (parcel skews to electronics and
//           retail-like industries, "other" to bulk commodities, air to
//           exports and high value bands)
//   densities ~ per-mode normal means, truncated at zero
//   weight ~ lognormal, independent of mode, so weighted shares converge to
//           the target shares as n grows
//
// noise_level mixes every per-mode distribution toward a mode-independent
// background; at 1.0 the features are independent of the label.
//
// Deterministic given the spec: same spec, same byte-identical record list.
std::vector<ShipmentRecord> generate_synthetic(const SyntheticSpec& spec);

}  // namespace freightbench
