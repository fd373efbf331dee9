#include "freightbench/synthetic.hpp"

#include <cmath>
#include <numeric>

#include "freightbench/errors.hpp"
#include "freightbench/rng.hpp"

namespace freightbench {
namespace {

constexpr int kSizeBands = 7;
constexpr int kValueBands = 4;
constexpr int kDistanceBands = 8;
constexpr int kCommodities = 9;
constexpr int kNaics = 45;
constexpr int kAreas = 132;

using Profile = std::vector<double>;

// Mix a class profile toward the uniform background and build inclusive cdf.
Profile mixed_cdf(const Profile& profile, double noise) {
  Profile cdf(profile.size());
  const double bg = 1.0 / static_cast<double>(profile.size());
  double total = 0.0;
  for (double p : profile) total += p;
  double acc = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    acc += (1.0 - noise) * profile[i] / total + noise * bg;
    cdf[i] = acc;
  }
  return cdf;
}

// Triangular bump over n categories centered at c with half-width w, on a
// small uniform floor. Used for the wide vocabularies (NAICS, CFS areas).
Profile bump_profile(int n, double c, double w, double floor) {
  Profile p(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    p[static_cast<std::size_t>(j)] = std::max(0.0, 1.0 - std::abs(j - c) / w) + floor;
  return p;
}

struct ModeProfile {
  Profile size_bands;
  Profile value_bands;
  Profile distance_bands;
  Profile commodity;
  Profile hazmat;
  double p_temp_controlled;
  double p_export;
  Profile naics;
  Profile origin_area;
  Profile dest_area;
  // density means: employee, warehouse, highway, railway, population,
  // dest highway, dest railway
  std::array<double, 7> density_means;
  double p_origin_warm;
  double p_dest_low_income;
  double p_dest_warm;
};

// Segment table: one entry per (mode, latent segment). For-hire truck has two
// genuinely different segments; the rest use a single profile.
struct ModeSpec {
  double p_second_segment;
  ModeProfile seg[2];
};

const std::array<ModeSpec, kNumModes>& mode_specs() {
  static const std::array<ModeSpec, kNumModes> specs = [] {
    std::array<ModeSpec, kNumModes> s{};

    // for-hire truck, segment 0: short-haul less-than-truckload
    ModeProfile fht0;
    fht0.size_bands = {0.05, 0.20, 0.35, 0.30, 0.10, 0.00, 0.00};
    fht0.value_bands = {0.30, 0.40, 0.25, 0.05};
    fht0.distance_bands = {0.45, 0.35, 0.15, 0.05, 0.00, 0.00, 0.00, 0.00};
    fht0.commodity = {0.15, 0.20, 0.05, 0.05, 0.10, 0.15, 0.15, 0.05, 0.10};
    fht0.hazmat = {0.90, 0.05, 0.05};
    fht0.p_temp_controlled = 0.25;
    fht0.p_export = 0.02;
    fht0.naics = bump_profile(kNaics, 15, 12, 0.02);
    fht0.origin_area = bump_profile(kAreas, 40, 80, 0.2);
    fht0.dest_area = bump_profile(kAreas, 50, 80, 0.2);
    fht0.density_means = {3.0, 25, 1.2, 0.25, 1.5, 1.2, 0.25};
    fht0.p_origin_warm = 0.45;
    fht0.p_dest_low_income = 0.40;
    fht0.p_dest_warm = 0.45;

    // for-hire truck, segment 1: long-haul truckload
    ModeProfile fht1 = fht0;
    fht1.size_bands = {0.00, 0.00, 0.05, 0.15, 0.40, 0.30, 0.10};
    fht1.value_bands = {0.10, 0.25, 0.35, 0.30};
    fht1.distance_bands = {0.00, 0.05, 0.15, 0.20, 0.20, 0.20, 0.12, 0.08};
    fht1.p_temp_controlled = 0.05;
    fht1.p_export = 0.05;

    s[0].p_second_segment = 0.45;
    s[0].seg[0] = fht0;
    s[0].seg[1] = fht1;

    // private truck: short-haul own-account freight
    ModeProfile pt;
    pt.size_bands = {0.05, 0.15, 0.30, 0.30, 0.15, 0.04, 0.01};
    pt.value_bands = {0.35, 0.35, 0.20, 0.10};
    pt.distance_bands = {0.55, 0.30, 0.10, 0.04, 0.01, 0.00, 0.00, 0.00};
    pt.commodity = {0.25, 0.20, 0.10, 0.05, 0.05, 0.15, 0.10, 0.02, 0.08};
    pt.hazmat = {0.88, 0.07, 0.05};
    pt.p_temp_controlled = 0.20;
    pt.p_export = 0.01;
    pt.naics = bump_profile(kNaics, 5, 8, 0.02);
    pt.origin_area = bump_profile(kAreas, 70, 80, 0.2);
    pt.dest_area = bump_profile(kAreas, 70, 80, 0.2);
    pt.density_means = {2.5, 15, 1.0, 0.20, 1.2, 1.0, 0.20};
    pt.p_origin_warm = 0.50;
    pt.p_dest_low_income = 0.45;
    pt.p_dest_warm = 0.50;
    s[1].p_second_segment = 0.0;
    s[1].seg[0] = pt;
    s[1].seg[1] = pt;

    // parcel service: light, high-count retail shipments
    ModeProfile ps;
    ps.size_bands = {0.55, 0.35, 0.09, 0.01, 0.00, 0.00, 0.00};
    ps.value_bands = {0.45, 0.35, 0.15, 0.05};
    ps.distance_bands = {0.10, 0.15, 0.20, 0.15, 0.12, 0.12, 0.08, 0.08};
    ps.commodity = {0.02, 0.15, 0.01, 0.01, 0.05, 0.15, 0.15, 0.30, 0.16};
    ps.hazmat = {0.98, 0.005, 0.015};
    ps.p_temp_controlled = 0.02;
    ps.p_export = 0.05;
    ps.naics = bump_profile(kNaics, 35, 8, 0.02);
    ps.origin_area = bump_profile(kAreas, 90, 80, 0.2);
    ps.dest_area = bump_profile(kAreas, 90, 80, 0.2);
    ps.density_means = {4.0, 40, 1.5, 0.30, 2.5, 1.5, 0.30};
    ps.p_origin_warm = 0.45;
    ps.p_dest_low_income = 0.30;
    ps.p_dest_warm = 0.45;
    s[2].p_second_segment = 0.0;
    s[2].seg[0] = ps;
    s[2].seg[1] = ps;

    // air (includes truck-air combinations): high value, long distance
    ModeProfile air;
    air.size_bands = {0.30, 0.40, 0.25, 0.05, 0.00, 0.00, 0.00};
    air.value_bands = {0.05, 0.15, 0.35, 0.45};
    air.distance_bands = {0.00, 0.02, 0.08, 0.10, 0.15, 0.25, 0.20, 0.20};
    air.commodity = {0.01, 0.04, 0.01, 0.01, 0.08, 0.05, 0.20, 0.50, 0.10};
    air.hazmat = {0.95, 0.01, 0.04};
    air.p_temp_controlled = 0.05;
    air.p_export = 0.35;
    air.naics = bump_profile(kNaics, 27, 5, 0.02);
    air.origin_area = bump_profile(kAreas, 20, 80, 0.2);
    air.dest_area = bump_profile(kAreas, 110, 80, 0.2);
    air.density_means = {5.0, 30, 1.6, 0.30, 3.0, 1.6, 0.30};
    air.p_origin_warm = 0.45;
    air.p_dest_low_income = 0.25;
    air.p_dest_warm = 0.45;
    s[3].p_second_segment = 0.0;
    s[3].seg[0] = air;
    s[3].seg[1] = air;

    // other: rail / water / pipeline bulk movements
    ModeProfile oth;
    oth.size_bands = {0.00, 0.00, 0.02, 0.08, 0.30, 0.25, 0.35};
    oth.value_bands = {0.20, 0.30, 0.30, 0.20};
    oth.distance_bands = {0.05, 0.10, 0.15, 0.15, 0.15, 0.15, 0.12, 0.13};
    oth.commodity = {0.10, 0.05, 0.25, 0.30, 0.15, 0.10, 0.03, 0.01, 0.01};
    oth.hazmat = {0.60, 0.25, 0.15};
    oth.p_temp_controlled = 0.05;
    oth.p_export = 0.10;
    oth.naics = bump_profile(kNaics, 12, 10, 0.02);
    oth.origin_area = bump_profile(kAreas, 60, 80, 0.2);
    oth.dest_area = bump_profile(kAreas, 30, 80, 0.2);
    oth.density_means = {2.0, 10, 0.8, 0.60, 0.8, 0.8, 0.60};
    oth.p_origin_warm = 0.45;
    oth.p_dest_low_income = 0.50;
    oth.p_dest_warm = 0.45;
    s[4].p_second_segment = 0.0;
    s[4].seg[0] = oth;
    s[4].seg[1] = oth;

    return s;
  }();
  return specs;
}

// Raw-value draw ranges per band: (lo, hi] segments extending the bounds with
// a synthetic ceiling above the last bound.
std::pair<double, double> band_range(int band, const std::vector<double>& bounds) {
  const double lo = band == 0 ? 0.0 : bounds[static_cast<std::size_t>(band - 1)];
  const double hi = band < static_cast<int>(bounds.size())
                        ? bounds[static_cast<std::size_t>(band)]
                        : bounds.back() * 2.0;
  return {lo, hi};
}

double draw_in_band(Rng& rng, int band, const std::vector<double>& bounds) {
  const auto [lo, hi] = band_range(band, bounds);
  // (lo, hi]: 1 - uniform01() lies in (0, 1]
  return lo + (hi - lo) * (1.0 - rng.uniform01());
}

double mix_prob(double p, double noise) { return (1.0 - noise) * p + noise * 0.5; }

const std::array<double, 7>& global_density_means() {
  static const std::array<double, 7> means = [] {
    std::array<double, 7> m{};
    for (const ModeSpec& spec : mode_specs())
      for (std::size_t k = 0; k < m.size(); ++k) m[k] += spec.seg[0].density_means[k] / kNumModes;
    return m;
  }();
  return means;
}

}  // namespace

std::array<double, kNumModes> survey_mode_shares() {
  std::array<double, kNumModes> shares = {0.1658, 0.2606, 0.5585, 0.0136, 0.0016};
  double total = 0.0;
  for (double s : shares) total += s;
  for (double& s : shares) s /= total;
  return shares;
}

void SyntheticSpec::validate() const {
  if (n_records == 0) throw ValidationError("n_records must be positive");
  double total = 0.0;
  for (double s : target_mode_shares) {
    if (s < 0.0) throw ValidationError("target_mode_shares must be nonnegative");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("target_mode_shares must sum to 1");
  if (noise_level < 0.0 || noise_level > 1.0)
    throw ValidationError("noise_level must lie in [0, 1]");
}

std::vector<ShipmentRecord> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, {0x53594e54u}));  // independent of other streams
  const double noise = spec.noise_level;
  const BinningScheme bins;

  std::vector<double> mode_cdf(kNumModes);
  double acc = 0.0;
  for (int m = 0; m < kNumModes; ++m) {
    acc += spec.target_mode_shares[static_cast<std::size_t>(m)];
    mode_cdf[static_cast<std::size_t>(m)] = acc;
  }

  // Per-(mode, segment) cdfs, mixed once up front.
  struct SegCdf {
    Profile size, value, distance, commodity, hazmat, naics, origin, dest;
  };
  std::array<std::array<SegCdf, 2>, kNumModes> cdfs;
  for (int m = 0; m < kNumModes; ++m) {
    for (int z = 0; z < 2; ++z) {
      const ModeProfile& p = mode_specs()[static_cast<std::size_t>(m)].seg[z];
      SegCdf& c = cdfs[static_cast<std::size_t>(m)][static_cast<std::size_t>(z)];
      c.size = mixed_cdf(p.size_bands, noise);
      c.value = mixed_cdf(p.value_bands, noise);
      c.distance = mixed_cdf(p.distance_bands, noise);
      c.commodity = mixed_cdf(p.commodity, noise);
      c.hazmat = mixed_cdf(p.hazmat, noise);
      c.naics = mixed_cdf(p.naics, noise);
      c.origin = mixed_cdf(p.origin_area, noise);
      c.dest = mixed_cdf(p.dest_area, noise);
    }
  }

  const auto& global_means = global_density_means();
  const std::array<double, 7> density_sds = {1.5, 12.0, 0.5, 0.15, 1.0, 0.5, 0.15};

  std::vector<ShipmentRecord> records;
  records.reserve(spec.n_records);
  for (std::size_t i = 0; i < spec.n_records; ++i) {
    ShipmentRecord r;
    const int m = static_cast<int>(rng.weighted_index(mode_cdf));
    r.mode = static_cast<ModeClass>(m);
    const ModeSpec& ms = mode_specs()[static_cast<std::size_t>(m)];
    const int z = rng.uniform01() < ms.p_second_segment ? 1 : 0;
    const ModeProfile& prof = ms.seg[z];
    const SegCdf& c = cdfs[static_cast<std::size_t>(m)][static_cast<std::size_t>(z)];

    r.size_lb = draw_in_band(rng, static_cast<int>(rng.weighted_index(c.size)), bins.size_bounds);
    r.value_usd =
        draw_in_band(rng, static_cast<int>(rng.weighted_index(c.value)), bins.value_bounds);
    r.distance_mi =
        draw_in_band(rng, static_cast<int>(rng.weighted_index(c.distance)), bins.distance_bounds);
    r.commodity = static_cast<int>(rng.weighted_index(c.commodity));
    r.hazmat = static_cast<int>(rng.weighted_index(c.hazmat));
    r.temp_controlled = rng.uniform01() < mix_prob(prof.p_temp_controlled, noise);
    r.export_shipment = rng.uniform01() < mix_prob(prof.p_export, noise);
    r.origin_cfs = static_cast<int>(rng.weighted_index(c.origin));
    r.dest_cfs = static_cast<int>(rng.weighted_index(c.dest));
    r.naics = static_cast<int>(rng.weighted_index(c.naics));

    std::array<double, 7> densities;
    for (std::size_t k = 0; k < densities.size(); ++k) {
      const double mean = (1.0 - noise) * prof.density_means[k] + noise * global_means[k];
      const double sd = density_sds[k] * (1.0 + noise);
      densities[k] = std::max(0.0, rng.normal(mean, sd));
    }
    r.origin_employee_density = densities[0];
    r.origin_warehouse_count = std::floor(densities[1]);
    r.origin_highway_density = densities[2];
    r.origin_railway_density = densities[3];
    r.dest_population_density = densities[4];
    r.dest_highway_density = densities[5];
    r.dest_railway_density = densities[6];

    r.origin_temp_over_60f = rng.uniform01() < mix_prob(prof.p_origin_warm, noise);
    r.dest_income_under_50k = rng.uniform01() < mix_prob(prof.p_dest_low_income, noise);
    r.dest_temp_over_60f = rng.uniform01() < mix_prob(prof.p_dest_warm, noise);

    r.weight = std::exp(0.3 * rng.normal());  // mode-independent expansion factor
    records.push_back(r);
  }
  return records;
}

}  // namespace freightbench
