#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mg/controllers.hpp"
#include "mg/dynamics.hpp"
#include "mg/grid.hpp"

namespace mg {

struct ConfigOverrides {
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
};

/// A fully resolved analysis configuration. `resolved` holds every setting
/// with defaults filled in; parsing it again yields the same configuration.
struct Config {
  nlohmann::json resolved;
  std::string base_dir;

  SystemPtr system;
  std::optional<Controller> controller;
  // Set when the controller is a hybrid.
  std::optional<Controller> primary;
  std::optional<Controller> fallback;

  std::vector<int> subdiv_exp;
  double tau = 1.0;
  double step = 0.01;
  int refine = 1;
  std::optional<double> lipschitz;
  std::size_t lipschitz_pairs = 10000;
  double lipschitz_safety = 1.2;
  bool cache_images = true;
  std::string dump_cache;
  std::string load_cache;
  bool force_star = false;
  std::size_t projection_x = 0;
  std::size_t projection_y = 1;

  std::vector<std::uint32_t> lattice;
  std::uint64_t horizon = 500;
  double epsilon = 0.1;

  std::size_t hybrid_samples = 1000;
  std::uint64_t hybrid_horizon = 2000;
  double hybrid_epsilon = 0.1;

  std::uint64_t seed = 1;
  unsigned workers = 0;

  CubicalGrid grid() const;
  /// FNV-1a of the resolved system and controller sections.
  std::uint64_t system_hash() const;
};

/// Errors are ConfigError with the file name and either line:column (syntax)
/// or a JSON pointer to the offending value.
Config load_config(const std::string& path, const ConfigOverrides& overrides = {});
Config parse_config(const std::string& text, const std::string& source,
                    const std::string& base_dir, const ConfigOverrides& overrides = {});

/// Canonical single-line JSON used for hashing.
std::string canonical_json(const nlohmann::json& value);
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace mg
