#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "cptych/field.hpp"
#include "cptych/forward.hpp"
#include "cptych/scenario.hpp"
#include "cptych/solvers.hpp"

namespace cptych {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// When coded-surface updates begin.
enum class CsStartRule {
  Explicit,  // use SolverConfig::cs_update_start as given
  Half,      // outer_iters / 2, resolved once outer_iters is final
  Never,
};

enum class ObjectInit { Flat, Truth };
enum class SurfaceInit { Container, Ones };

struct SolverSection {
  SolverConfig solver;
  CsStartRule cs_start_rule = CsStartRule::Never;
  ObjectInit init_object = ObjectInit::Flat;
  SurfaceInit init_surface = SurfaceInit::Container;
  std::optional<PerturbationConfig> surface_perturbation;

  /// Copy of `solver` with the cs_update_start rule applied.
  SolverConfig resolved() const;
};

struct OutputSection {
  bool previews = true;
};

/// Union of every configurable section. Parsing is strict: unknown keys fail
/// with the dotted key path in the message.
struct RunConfig {
  ScenarioConfig scenario;
  NoiseSpec noise = NoNoise{};
  OpticalGeometry geometry;
  SolverSection solver;
  OutputSection output;

  /// Overrides both the scenario and the solver seed.
  void override_seed(std::uint64_t seed);
  /// Hash of the canonical (defaults filled in) JSON form.
  std::uint64_t hash() const;
};

RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace cptych
