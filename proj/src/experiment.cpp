#include "lorot/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "lorot/curvature.hpp"
#include "lorot/geodesics.hpp"

namespace lorot {

namespace {

using nlohmann::json;

Box box_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("box must be a nonempty array of [lo, hi]");
  Box box;
  for (const auto& axis : j) {
    if (!axis.is_array() || axis.size() != 2) throw std::invalid_argument("box entries must be [lo, hi]");
    const double lo = axis[0].get<double>(), hi = axis[1].get<double>();
    if (!(lo < hi)) throw std::invalid_argument("box entries need lo < hi");
    box.axes.emplace_back(lo, hi);
  }
  return box;
}

Event event_from_json(const json& j) { return Event(j.get<std::vector<double>>()); }

// Runs `fn` and rethrows parameter problems as ConfigError tagged with `where`.
template <class Fn>
auto at_field(const std::string& where, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

struct Context {
  SampledSpace space;
  MinkowskiKernel kernel;
  GeodesicOracle oracle = minkowski_oracle();
  std::map<std::string, DiscreteMeasure> measures;
};

const DiscreteMeasure& measure_ref(const Context& ctx, const json& check, const char* key) {
  const auto name = check.at(key).get<std::string>();
  const auto it = ctx.measures.find(name);
  if (it == ctx.measures.end()) throw std::invalid_argument(std::string(key) + " references unknown measure '" + name + "'");
  return it->second;
}

CheckOptions options_from_json(const json& check) {
  CheckOptions o;
  if (check.contains("eps")) o.eps = check.at("eps").get<double>();
  o.slack_constant = check.value("slack_constant", 1.0);
  o.density = density_method_from_string(check.value("density", std::string("nearest_cell")));
  o.curve_levels = check.value("curve_levels", 6u);
  if (o.curve_levels == 0 || o.curve_levels > 12) throw std::invalid_argument("curve_levels must lie in [1, 12]");
  return o;
}

// Everything a check needs, resolved before any worker starts.
struct PreparedCheck {
  std::string type;
  json raw;
  CheckOptions options;
  ConditionSpec spec;
};

CheckReport run_check(const Context& ctx, const PreparedCheck& pc) {
  const json& c = pc.raw;
  const auto& opt = pc.options;
  if (pc.type == "tcd") {
    return check_tcd(measure_ref(ctx, c, "mu0"), measure_ref(ctx, c, "mu1"), pc.spec, ctx.kernel, ctx.oracle, ctx.space,
                     opt);
  }
  if (pc.type == "tmcp") {
    return check_tmcp(measure_ref(ctx, c, "mu0"), event_from_json(c.at("x1")), pc.spec, ctx.kernel, ctx.oracle,
                      ctx.space, opt);
  }
  if (pc.type == "midpoint") {
    return midpoint_check(measure_ref(ctx, c, "mu0"), measure_ref(ctx, c, "mu1"), pc.spec, ctx.kernel, ctx.oracle,
                          ctx.space, opt);
  }
  if (pc.type == "pathwise") {
    const auto& mu0 = measure_ref(ctx, c, "mu0");
    const auto& mu1 = measure_ref(ctx, c, "mu1");
    const auto result = solve_lp_optimal(mu0, mu1, pc.spec.p, ctx.kernel, opt.transport);
    if (!is_timelike_dualizable(result)) throw DualizabilityError("pathwise: optimal coupling is not chronological");
    const auto grid = dyadic_grid(opt.curve_levels);
    const auto plan = build_plan(result, mu0, mu1, ctx.oracle, grid, pc.spec.p);
    return check_pathwise(plan, density_estimate(mu0, ctx.space, opt.density),
                          density_estimate(mu1, ctx.space, opt.density), pc.spec, ctx.kernel, ctx.space, opt);
  }
  if (pc.type == "good_geodesic") {
    return good_geodesic_bisect(measure_ref(ctx, c, "mu0"), measure_ref(ctx, c, "mu1"), pc.spec,
                                c.value("depth", 3u), ctx.kernel, ctx.oracle, ctx.space, opt)
        .report;
  }
  if (pc.type == "tmcp_good_geodesic") {
    return tmcp_good_geodesic(measure_ref(ctx, c, "mu0"), event_from_json(c.at("x1")), pc.spec, c.value("depth", 3u),
                              ctx.kernel, ctx.oracle, ctx.space, opt)
        .report;
  }
  if (pc.type == "brunn_minkowski") {
    const auto A0 = ctx.space.indices_in_box(box_from_json(c.at("A0")));
    const auto A1 = ctx.space.indices_in_box(box_from_json(c.at("A1")));
    return brunn_minkowski(A0, A1, c.value("t", 0.5), c.value("K", 0.0),
                           c.value("Nprime_grid", std::vector<double>{2.0, 4.0}), ctx.kernel, ctx.oracle, ctx.space,
                           opt);
  }
  if (pc.type == "bonnet_myers") {
    return bonnet_myers_check(ctx.space, ctx.kernel, c.at("K").get<double>(), c.at("N").get<double>());
  }
  if (pc.type == "bishop_gromov") {
    const Event x = event_from_json(c.at("x"));
    const Event apex = event_from_json(c.at("apex"));
    const auto E = causal_diamond(ctx.space, ctx.kernel, x, apex);
    return bishop_gromov(x, E, c.at("r").get<double>(), c.at("R").get<double>(), c.value("K", 0.0),
                         c.at("N").get<double>(), c.value("delta", 0.02), ctx.space, ctx.kernel, ctx.oracle, opt);
  }
  throw std::invalid_argument("unknown check type '" + pc.type + "'");
}

bool needs_condition(const std::string& type) {
  return type == "tcd" || type == "tmcp" || type == "midpoint" || type == "pathwise" || type == "good_geodesic" ||
         type == "tmcp_good_geodesic";
}

}  // namespace

unsigned worker_threads() {
  if (const char* env = std::getenv("LOROT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

DiscreteMeasure measure_from_json(const json& j, const SampledSpace& space, std::mt19937_64& rng) {
  const auto type = j.at("type").get<std::string>();
  DiscreteMeasure m;
  if (type == "cells_box") {
    const auto cells = space.indices_in_box(box_from_json(j.at("box")));
    if (cells.empty()) throw std::invalid_argument("cells_box contains no cell centers");
    m = DiscreteMeasure::uniform_on_cells(space, cells);
  } else if (type == "dirac") {
    m = DiscreteMeasure::dirac(event_from_json(j.at("at")));
  } else if (type == "atoms") {
    for (const auto& a : j.at("atoms")) {
      m.atoms.push_back(event_from_json(a.at("at")));
      m.weights.push_back(a.at("w").get<double>());
    }
  } else if (type == "random_atoms") {
    const auto count = j.at("count").get<std::size_t>();
    if (count == 0) throw std::invalid_argument("random_atoms needs count >= 1");
    const Box box = box_from_json(j.at("box"));
    for (std::size_t k = 0; k < count; ++k) {
      std::vector<double> c;
      for (const auto& [lo, hi] : box.axes) c.push_back(std::uniform_real_distribution<double>(lo, hi)(rng));
      m.atoms.emplace_back(std::move(c));
      m.weights.push_back(1.0 / static_cast<double>(count));
    }
  } else {
    throw std::invalid_argument("unknown measure type '" + type + "'");
  }
  for (const auto& a : m.atoms) {
    if (a.dim() != space.spatial_dim() + 1) throw std::invalid_argument("atom dimension does not match the space");
  }
  m.validate();
  return m;
}

std::string reports_csv(const std::vector<CheckReport>& reports) {
  std::string out = "check,label,t,Nprime,lhs,rhs,margin\n";
  for (const auto& r : reports) out += to_csv(r, false);
  return out;
}

ExperimentResult run_experiment(const json& config) {
  if (!config.is_object()) throw ConfigError("config: top level must be an object");
  const int schema = at_field("schema", [&] { return config.at("schema").get<int>(); });
  if (schema != kConfigSchema) throw ConfigError("schema: unsupported version " + std::to_string(schema));
  const auto seed = at_field("seed", [&] { return config.value("seed", std::uint64_t{0}); });
  std::mt19937_64 rng(seed);

  auto space = at_field("space", [&] { return space_from_json(config.at("space")); });
  const auto dim = space.spatial_dim();
  Context ctx{std::move(space), minkowski_kernel(dim), minkowski_oracle(), {}};

  if (config.contains("measures")) {
    const auto& ms = config.at("measures");
    if (!ms.is_object()) throw ConfigError("measures: must be an object");
    for (const auto& [name, spec] : ms.items()) {
      ctx.measures.emplace(name, at_field("measures." + name, [&] { return measure_from_json(spec, ctx.space, rng); }));
    }
  }

  const auto checks = at_field("checks", [&] { return config.at("checks"); });
  if (!checks.is_array() || checks.empty()) throw ConfigError("checks: must be a nonempty array");
  std::vector<PreparedCheck> prepared;
  for (std::size_t k = 0; k < checks.size(); ++k) {
    const std::string where = "checks[" + std::to_string(k) + "]";
    prepared.push_back(at_field(where, [&] {
      PreparedCheck pc;
      pc.raw = checks[k];
      pc.type = pc.raw.at("type").get<std::string>();
      pc.options = options_from_json(pc.raw);
      if (needs_condition(pc.type)) pc.spec = ConditionSpec::from_json(pc.raw.at("condition"));
      for (const char* key : {"mu0", "mu1"}) {
        if (pc.raw.contains(key)) (void)measure_ref(ctx, pc.raw, key);
      }
      return pc;
    }));
  }

  // Independent checks run on up to worker_threads() workers; results keep config order.
  std::vector<CheckReport> reports(prepared.size());
  std::vector<std::exception_ptr> errors(prepared.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < prepared.size();) {
      try {
        reports[k] = run_check(ctx, prepared[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned n_workers = std::min<unsigned>(worker_threads(), static_cast<unsigned>(prepared.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  ExperimentResult res;
  for (std::size_t k = 0; k < prepared.size(); ++k) {
    if (errors[k]) {
      const std::string where = "checks[" + std::to_string(k) + "] (" + prepared[k].type + ")";
      try {
        std::rethrow_exception(errors[k]);
      } catch (const DualizabilityError& e) {
        reports[k].name = prepared[k].type;
        reports[k].pass = false;
        reports[k].notes.push_back(std::string("not dualizable: ") + e.what());
      } catch (const std::domain_error& e) {
        reports[k].name = prepared[k].type;
        reports[k].pass = false;
        reports[k].notes.push_back(std::string("domain error: ") + e.what());
      } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
    res.pass = res.pass && reports[k].pass;
  }

  res.summary = {{"schema", kConfigSchema}, {"seed", seed}, {"pass", res.pass}, {"reports", json::array()}};
  for (const auto& r : reports) res.summary["reports"].push_back(to_json(r));
  res.reports = std::move(reports);
  return res;
}

std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result, const std::filesystem::path& dir,
                                                 const std::string& name) {
  const auto json_path = dir / (name + ".json");
  const auto csv_path = dir / (name + ".csv");
  write_atomic(json_path, result.summary.dump(2) + "\n");
  write_atomic(csv_path, reports_csv(result.reports));
  return {json_path, csv_path};
}

ExperimentResult run_experiment_file(const std::filesystem::path& path, const std::filesystem::path& output_dir) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json config;
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << path.string() << ": " << e.what();
    throw ConfigError(msg.str());
  }
  auto result = run_experiment(config);
  const auto out = at_field("output", [&] { return config.value("output", json::object()); });
  std::filesystem::path dir = output_dir;
  if (dir.empty()) dir = out.value("dir", std::string("results"));
  const auto name = out.value("name", path.stem().string());
  result.summary["config"] = path.filename().string();
  result.files = write_outputs(result, dir, name);
  return result;
}

}  // namespace lorot
