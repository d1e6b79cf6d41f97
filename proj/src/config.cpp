#include "cptych/config.hpp"

#include <fstream>
#include <set>

#include "cptych/io.hpp"

namespace cptych {

using nlohmann::json;

namespace {

// Reads typed fields out of one JSON object and rejects leftovers.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("'" + dotted(key) + "' has the wrong type");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string dotted(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError("unknown configuration key '" + dotted(it.key()) + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_scenario(const json& j, RunConfig& cfg) {
  Section s(j, "scenario");
  auto& sc = cfg.scenario;
  s.get("rows", sc.rows);
  s.get("cols", sc.cols);
  s.get("num_positions", sc.num_positions);
  s.get("position_span", sc.position_span);
  s.get("position_mode", sc.position_mode);
  s.get("background", sc.background);
  s.get("amp_source", sc.amp_source.ref);
  s.get("phase_source", sc.phase_source.ref);
  s.get("phase_min", sc.phase_min);
  s.get("phase_max", sc.phase_max);
  s.get("cs_min_modulus", sc.cs_min_modulus);
  s.get("seed", sc.seed);
  if (const json* n = s.child("noise")) {
    Section ns(*n, "scenario.noise");
    std::string type = "none";
    PoissonNoise p{1e4, 0};
    ns.get("type", type);
    ns.get("photon_scale", p.photon_scale);
    ns.finish();
    if (type == "none") {
      cfg.noise = NoNoise{};
    } else if (type == "poisson") {
      if (!(p.photon_scale > 0.0)) throw ConfigError("'scenario.noise.photon_scale' must be > 0");
      cfg.noise = p;
    } else {
      throw ConfigError("'scenario.noise.type' must be \"none\" or \"poisson\", got \"" + type + "\"");
    }
  }
  s.finish();
}

void parse_geometry(const json& j, OpticalGeometry& g) {
  Section s(j, "geometry");
  s.get("wavelength", g.wavelength);
  s.get("pitch", g.pitch);
  s.get("d1", g.d1);
  s.get("d2", g.d2);
  s.get("sr_ratio", g.sr_ratio);
  s.finish();
}

void parse_solver(const json& j, SolverSection& sec) {
  Section s(j, "solver");
  auto& c = sec.solver;
  std::string algorithm(to_string(c.algorithm));
  s.get("algorithm", algorithm);
  try {
    c.algorithm = parse_algorithm(algorithm);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("'solver.algorithm': ") + e.what());
  }
  s.get("outer_iters", c.outer_iters);
  if (const json* cs = s.child("cs_update_start")) {
    if (cs->is_string()) {
      const auto rule = cs->get<std::string>();
      if (rule == "half") {
        sec.cs_start_rule = CsStartRule::Half;
      } else if (rule == "never") {
        sec.cs_start_rule = CsStartRule::Never;
      } else {
        throw ConfigError("'solver.cs_update_start' must be an integer, \"half\" or \"never\"");
      }
    } else if (cs->is_number_integer()) {
      sec.cs_start_rule = CsStartRule::Explicit;
      c.cs_update_start = cs->get<int>();
    } else {
      throw ConfigError("'solver.cs_update_start' must be an integer, \"half\" or \"never\"");
    }
  }
  s.get("alpha1", c.alpha1);
  s.get("alpha2", c.alpha2);
  if (const json* a = s.child("lsq_alpha"); a && !a->is_null()) {
    if (!a->is_number()) throw ConfigError("'solver.lsq_alpha' has the wrong type");
    c.lsq_alpha = a->get<double>();
  }
  s.get("batch_size", c.batch_size);
  s.get("nesterov", c.nesterov);
  s.get("seed", c.seed);
  std::string mode = c.batch_mode == BatchMode::Average ? "average" : "sequential";
  s.get("batch_mode", mode);
  if (mode == "sequential") {
    c.batch_mode = BatchMode::Sequential;
  } else if (mode == "average") {
    c.batch_mode = BatchMode::Average;
  } else {
    throw ConfigError("'solver.batch_mode' must be \"sequential\" or \"average\"");
  }
  if (const json* b = s.child("time_budget_seconds"); b && !b->is_null()) {
    if (!b->is_number()) throw ConfigError("'solver.time_budget_seconds' has the wrong type");
    c.time_budget_seconds = b->get<double>();
  }
  s.get("division_guard", c.division_guard);

  std::string init_object = sec.init_object == ObjectInit::Truth ? "truth" : "flat";
  s.get("init_object", init_object);
  if (init_object == "flat") {
    sec.init_object = ObjectInit::Flat;
  } else if (init_object == "truth") {
    sec.init_object = ObjectInit::Truth;
  } else {
    throw ConfigError("'solver.init_object' must be \"flat\" or \"truth\"");
  }

  if (const json* init = s.child("init_surface")) {
    Section is(*init, "solver.init_surface");
    std::string source = sec.init_surface == SurfaceInit::Ones ? "ones" : "container";
    is.get("source", source);
    if (source == "container") {
      sec.init_surface = SurfaceInit::Container;
    } else if (source == "ones") {
      sec.init_surface = SurfaceInit::Ones;
    } else {
      throw ConfigError("'solver.init_surface.source' must be \"container\" or \"ones\"");
    }
    if (const json* p = is.child("perturb"); p && !p->is_null()) {
      Section ps(*p, "solver.init_surface.perturb");
      PerturbationConfig pc;
      ps.get("sigma_amp", pc.sigma_amp);
      ps.get("sigma_ang", pc.sigma_ang);
      ps.get("seed", pc.seed);
      ps.finish();
      if (!(pc.sigma_amp >= 0.0) || !(pc.sigma_ang >= 0.0))
        throw ConfigError("'solver.init_surface.perturb' sigmas must be >= 0");
      sec.surface_perturbation = pc;
    }
    is.finish();
  }

  if (const json* tv = s.child("tv")) {
    Section ts(*tv, "solver.tv");
    ts.get("lambda", c.tv.lambda);
    ts.get("eta", c.tv.eta);
    ts.get("sub_iters", c.tv.sub_iters);
    ts.finish();
  }
  s.finish();
}

void parse_output(const json& j, OutputSection& out) {
  Section s(j, "output");
  s.get("previews", out.previews);
  s.finish();
}

}  // namespace

SolverConfig SolverSection::resolved() const {
  SolverConfig c = solver;
  switch (cs_start_rule) {
    case CsStartRule::Explicit: break;
    case CsStartRule::Half: c.cs_update_start = c.outer_iters / 2; break;
    case CsStartRule::Never: c.cs_update_start = std::numeric_limits<int>::max(); break;
  }
  return c;
}

void RunConfig::override_seed(std::uint64_t seed) {
  scenario.seed = seed;
  solver.solver.seed = seed;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_json(*this).dump()); }

RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  Section top(j, "");
  if (const json* s = top.child("scenario")) parse_scenario(*s, cfg);
  if (const json* g = top.child("geometry")) parse_geometry(*g, cfg.geometry);
  if (const json* s = top.child("solver")) parse_solver(*s, cfg.solver);
  if (const json* o = top.child("output")) parse_output(*o, cfg.output);
  top.finish();

  try {
    cfg.geometry.validate();
    cfg.scenario.validate(cfg.geometry.sr_ratio);
    const SolverConfig resolved = cfg.solver.resolved();
    if (resolved.outer_iters < 1) throw std::invalid_argument("solver.outer_iters must be >= 1");
    cfg.solver.solver.tv.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& cfg) {
  const auto& sc = cfg.scenario;
  json noise = {{"type", "none"}};
  if (const auto* p = std::get_if<PoissonNoise>(&cfg.noise)) noise = {{"type", "poisson"}, {"photon_scale", p->photon_scale}};

  const auto& c = cfg.solver.solver;
  json cs_start;
  switch (cfg.solver.cs_start_rule) {
    case CsStartRule::Explicit: cs_start = c.cs_update_start; break;
    case CsStartRule::Half: cs_start = "half"; break;
    case CsStartRule::Never: cs_start = "never"; break;
  }
  json init_surface = {{"source", cfg.solver.init_surface == SurfaceInit::Ones ? "ones" : "container"}};
  if (const auto& p = cfg.solver.surface_perturbation)
    init_surface["perturb"] = {{"sigma_amp", p->sigma_amp}, {"sigma_ang", p->sigma_ang}, {"seed", p->seed}};

  return json{
      {"scenario",
       {{"rows", sc.rows},
        {"cols", sc.cols},
        {"num_positions", sc.num_positions},
        {"position_span", sc.position_span},
        {"position_mode", sc.position_mode},
        {"background", sc.background},
        {"amp_source", sc.amp_source.ref},
        {"phase_source", sc.phase_source.ref},
        {"phase_min", sc.phase_min},
        {"phase_max", sc.phase_max},
        {"cs_min_modulus", sc.cs_min_modulus},
        {"seed", sc.seed},
        {"noise", noise}}},
      {"geometry",
       {{"wavelength", cfg.geometry.wavelength},
        {"pitch", cfg.geometry.pitch},
        {"d1", cfg.geometry.d1},
        {"d2", cfg.geometry.d2},
        {"sr_ratio", cfg.geometry.sr_ratio}}},
      {"solver",
       {{"algorithm", std::string(to_string(c.algorithm))},
        {"outer_iters", c.outer_iters},
        {"cs_update_start", cs_start},
        {"alpha1", c.alpha1},
        {"alpha2", c.alpha2},
        {"lsq_alpha", c.lsq_alpha ? json(*c.lsq_alpha) : json(nullptr)},
        {"batch_size", c.batch_size},
        {"nesterov", c.nesterov},
        {"seed", c.seed},
        {"batch_mode", c.batch_mode == BatchMode::Average ? "average" : "sequential"},
        {"time_budget_seconds", c.time_budget_seconds ? json(*c.time_budget_seconds) : json(nullptr)},
        {"division_guard", c.division_guard},
        {"init_object", cfg.solver.init_object == ObjectInit::Truth ? "truth" : "flat"},
        {"init_surface", init_surface},
        {"tv", {{"lambda", c.tv.lambda}, {"eta", c.tv.eta}, {"sub_iters", c.tv.sub_iters}}}}},
      {"output", {{"previews", cfg.output.previews}}}};
}

}  // namespace cptych
