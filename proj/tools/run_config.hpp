#pragma once

// JSON run configuration shared by every subcommand of gibbs_perc.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gibbsperc/bounds.hpp"
#include "gibbsperc/error.hpp"
#include "gibbsperc/io.hpp"
#include "gibbsperc/potential.hpp"
#include "gibbsperc/sampler.hpp"

namespace gperc::cli {

using nlohmann::json;

struct ContourConfig {
  double delta = 0.5;
  double m = 0.5;  // attraction level, 0 < m < M
};

struct RunConfig {
  json potential;
  int nu = 2;
  double ell = 2.0;
  double box = 20.0;
  std::vector<double> lambda_grid;
  std::vector<double> beta_grid;
  std::uint64_t seed = 1;
  std::size_t replicas = 16;
  std::size_t n_sweeps = 200;
  std::size_t burn_in = 200;
  std::size_t thin = 10;
  MoveMix move_mix;
  double r_cut = 0.0;
  std::optional<ContourConfig> contour;
  std::size_t gw_replicas = 100000;
  std::uint64_t max_generations = 10000;
  std::string proxy = "crossing";
  int axis = 0;
  std::string out = "out";
};

inline json default_config_json() {
  return json{
      {"potential",
       {{"family", "square_well"}, {"f", 0.5}, {"d", 1.0}, {"u0", 1.0}, {"well_depth", 1.0}, {"well_end", 1.5}}},
      {"nu", 2},
      {"ell", 3.0},
      {"box", 30.0},
      {"lambda_grid", {0.05, 0.1, 0.2, 0.5, 1.0}},
      {"beta_grid", {0.0, 2.0, 8.0}},
      {"seed", 1},
      {"replicas", 16},
      {"n_sweeps", 200},
      {"burn_in", 200},
      {"thin", 10},
      {"move_mix", {{"birth", 0.35}, {"death", 0.35}, {"translate", 0.30}}},
      {"r_cut", 0.0},
      {"contour", {{"delta", 0.5}, {"m", 0.9}}},
      {"gw", {{"replicas", 100000}, {"max_generations", 10000}}},
      {"percolation", {{"proxy", "crossing"}, {"axis", 0}}},
      {"out", "out"},
  };
}

inline PotentialSpec potential_from_json(const json &j) {
  try {
    const auto family = j.at("family").get<std::string>();
    if (family == "square_well")
      return make_square_well(j.at("f"), j.at("d"), j.value("u0", 0.0), j.at("well_depth"), j.at("well_end"));
    if (family == "power_tail")
      return make_power_tail(j.at("f"), j.at("d"), j.at("g"), j.value("u0", 0.0), j.at("well_depth"),
                             j.at("exponent"), j.at("amplitude"));
    throw Error(ErrorCode::ConfigError, "unknown potential family '" + family + "'");
  } catch (const json::exception &e) {
    throw Error(ErrorCode::ConfigError, std::string("potential: ") + e.what());
  }
}

/// Reads a config over the defaults: keys absent from `j` keep their default value.
inline RunConfig config_from_json(const json &j) {
  json merged = default_config_json();
  merged.merge_patch(j);
  RunConfig c;
  try {
    c.potential = merged.at("potential");
    c.nu = merged.at("nu");
    c.ell = merged.at("ell");
    c.box = merged.at("box");
    c.lambda_grid = merged.at("lambda_grid").get<std::vector<double>>();
    c.beta_grid = merged.at("beta_grid").get<std::vector<double>>();
    c.seed = merged.at("seed");
    c.replicas = merged.at("replicas");
    c.n_sweeps = merged.at("n_sweeps");
    c.burn_in = merged.at("burn_in");
    c.thin = merged.at("thin");
    const auto &mm = merged.at("move_mix");
    c.move_mix = {mm.at("birth"), mm.at("death"), mm.at("translate")};
    c.r_cut = merged.at("r_cut");
    if (merged.contains("contour") && !merged.at("contour").is_null()) {
      const auto &ct = merged.at("contour");
      c.contour = ContourConfig{ct.at("delta"), ct.at("m")};
    }
    c.gw_replicas = merged.at("gw").at("replicas");
    c.max_generations = merged.at("gw").at("max_generations");
    c.proxy = merged.at("percolation").at("proxy");
    c.axis = merged.at("percolation").at("axis");
    c.out = merged.at("out");
  } catch (const json::exception &e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (c.nu < 1 || c.nu > 3) throw Error(ErrorCode::ConfigError, "nu must be 1, 2 or 3");
  if (!(c.ell > 0.0)) throw Error(ErrorCode::ConfigError, "ell must be > 0");
  if (!(c.box > 0.0)) throw Error(ErrorCode::ConfigError, "box must be > 0");
  if (c.axis < 0 || c.axis >= c.nu) throw Error(ErrorCode::ConfigError, "axis out of range");
  if (c.proxy != "crossing" && c.proxy != "centre") throw Error(ErrorCode::ConfigError, "proxy must be crossing or centre");
  return c;
}

/// Canonical form used for hashing: the merged config, keys sorted.
inline json canonical_config(const json &user) {
  json merged = default_config_json();
  merged.merge_patch(user);
  return merged;
}

inline std::string config_hash(const json &user) { return hex64(fnv1a64(canonical_config(user).dump())); }

inline McParams mc_params(const RunConfig &c, double lambda, double beta) {
  McParams mc;
  mc.lambda = lambda;
  mc.beta = beta;
  mc.box = c.box;
  mc.seed = c.seed;
  mc.n_sweeps = c.n_sweeps;
  mc.burn_in = c.burn_in;
  mc.thin = c.thin;
  mc.move_mix = c.move_mix;
  mc.r_cut = c.r_cut;
  return mc;
}

inline std::optional<ContourParams> contour_params(const RunConfig &c, const PotentialSpec &p) {
  if (!c.contour) return std::nullopt;
  return make_contour_params(p, c.contour->m, c.contour->delta);
}

} // namespace gperc::cli
