// lorot: command-line front end for the transport and curvature checks.
//
// Exit codes: 0 all checks pass, 2 some check fails, 1 usage or config error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorot/coeffs.hpp"
#include "lorot/curvature.hpp"
#include "lorot/experiment.hpp"
#include "lorot/smoothlab.hpp"
#include "lorot/transport.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFail = 2;

int emit(const lorot::CheckReport& report, const std::string& out) {
  const std::string text = lorot::to_json(report).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    lorot::write_atomic(out, text);
    std::cout << out << "\n";
  }
  std::cerr << report.name << ": " << (report.pass ? "PASS" : "FAIL") << " (worst margin " << report.worst_margin
            << ", tolerance " << report.tolerance << ")\n";
  return report.pass ? kExitPass : kExitFail;
}

// Runs a config, optionally keeping only checks of one type.
int run_config(const std::string& path, const std::string& out_dir, const std::string& only_type,
               std::optional<std::uint64_t> seed) {
  nlohmann::json config;
  {
    std::ifstream in(path);
    if (!in) throw lorot::ConfigError("cannot read config " + path);
    try {
      config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw lorot::ConfigError(path + ": " + e.what());
    }
  }
  if (!only_type.empty()) {
    if (!config.is_object() || !config.contains("checks") || !config["checks"].is_array()) {
      throw lorot::ConfigError("checks: must be an array");
    }
    auto kept = nlohmann::json::array();
    for (const auto& c : config["checks"]) {
      if (c.is_object() && c.value("type", std::string()) == only_type) kept.push_back(c);
    }
    if (kept.empty()) throw lorot::ConfigError("config has no check of type '" + only_type + "'");
    config["checks"] = kept;
  }
  if (seed) {
    if (!config.is_object()) throw lorot::ConfigError("config: must be an object");
    config["seed"] = *seed;
  }
  auto result = lorot::run_experiment(config);
  const auto output = config.value("output", nlohmann::json::object());
  const std::string dir = out_dir.empty() ? output.value("dir", std::string("results")) : out_dir;
  std::string name = output.value("name", std::filesystem::path(path).stem().string());
  if (!only_type.empty()) name += "_" + only_type;
  result.summary["config"] = std::filesystem::path(path).filename().string();
  for (const auto& f : lorot::write_outputs(result, dir, name)) std::cout << f.string() << "\n";
  for (const auto& r : result.reports) {
    std::cerr << r.name << ": " << (r.pass ? "PASS" : "FAIL") << " (worst margin " << r.worst_margin << ")\n";
  }
  return result.pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lorentzian optimal transport and timelike curvature checks"};
  app.require_subcommand(1);

  std::string config, out, out_dir;

  auto* run = app.add_subcommand("run", "Run every check of a JSON config");
  run->add_option("config", config, "config path")->required();
  run->add_option("--out-dir", out_dir, "override output.dir");
  std::optional<std::uint64_t> seed;
  run->add_option("--seed", seed, "override the config seed");

  double K = 0.0, N = 2.0, t = 0.5, theta = 1.0;
  std::string kind = "sigma";
  auto* coeffs_cmd = app.add_subcommand("coeffs", "Evaluate a distortion coefficient");
  coeffs_cmd->add_option("--K", K, "curvature bound");
  coeffs_cmd->add_option("--N", N, "dimension bound")->check(CLI::Range(1.0, 1e300));
  coeffs_cmd->add_option("--t", t, "time in [0, 1]")->check(CLI::Range(0.0, 1.0));
  coeffs_cmd->add_option("--theta", theta, "time separation")->check(CLI::NonNegativeNumber);
  coeffs_cmd->add_option("--kind", kind, "sigma or tau")->check(CLI::IsMember({"sigma", "tau"}));

  std::string csv;
  auto* transport = app.add_subcommand("transport", "Solve an l_p transport instance");
  transport->add_option("--config", config, "instance JSON {mu0, mu1, p}")->required();
  transport->add_option("--csv", csv, "write the coupling as CSV");

  const std::vector<std::pair<std::string, std::string>> filtered = {
      {"check-tcd", "tcd"}, {"check-tmcp", "tmcp"}, {"good-geodesic", "good_geodesic"}, {"midpoint", "midpoint"}};
  std::vector<std::pair<CLI::App*, std::string>> filtered_cmds;
  for (const auto& [name, type] : filtered) {
    auto* cmd = app.add_subcommand(name, "Run the '" + type + "' checks of a config");
    cmd->add_option("--config", config, "config path")->required();
    cmd->add_option("--out-dir", out_dir, "override output.dir");
    cmd->add_option("--seed", seed, "override the config seed");
    filtered_cmds.emplace_back(cmd, type);
  }

  double side0 = 1.0, side1 = 1.0, gap = 4.0;
  std::size_t res = 128;
  std::vector<double> nprimes = {2.0, 4.0};
  auto* bm = app.add_subcommand("brunn-minkowski", "Squares of sides side0 and side1 separated in time by gap");
  bm->add_option("--side0", side0)->check(CLI::PositiveNumber);
  bm->add_option("--side1", side1)->check(CLI::PositiveNumber);
  bm->add_option("--gap", gap, "time offset between the centers")->check(CLI::PositiveNumber);
  bm->add_option("--t", t)->check(CLI::Range(0.0, 1.0));
  bm->add_option("--K", K);
  bm->add_option("--Nprime", nprimes)->delimiter(',');
  bm->add_option("--res", res, "cells per axis")->check(CLI::Range(4, 4096));
  bm->add_option("--out", out, "report path");

  double T = 4.0, r = 1.0, R = 2.0, delta = 0.02;
  std::size_t bg_res = 512;
  auto* bg = app.add_subcommand("bishop-gromov", "Causal diamond of height T in 1+1 Minkowski");
  bg->add_option("--T", T)->check(CLI::PositiveNumber);
  bg->add_option("--r", r)->check(CLI::PositiveNumber);
  bg->add_option("--R", R)->check(CLI::PositiveNumber);
  bg->add_option("--K", K);
  bg->add_option("--N", N)->check(CLI::Range(1.0, 1e300));
  bg->add_option("--res", bg_res, "cells per axis")->check(CLI::Range(8, 4096));
  bg->add_option("--delta", delta, "shell width")->check(CLI::PositiveNumber);
  bg->add_option("--out", out, "report path");

  std::string coefficient = "tau";
  double j0 = 1.0, j1 = 2.0;
  unsigned levels = 6;
  auto* smooth = app.add_subcommand("smooth-verify", "Distortion concavity of the equality-case Jacobian");
  smooth->add_option("--K", K);
  smooth->add_option("--Nprime", N, "N'")->check(CLI::Range(1.0, 1e300));
  smooth->add_option("--theta", theta)->check(CLI::PositiveNumber);
  smooth->add_option("--j0", j0)->check(CLI::PositiveNumber);
  smooth->add_option("--j1", j1)->check(CLI::PositiveNumber);
  smooth->add_option("--coefficient", coefficient)->check(CLI::IsMember({"sigma", "tau"}));
  smooth->add_option("--levels", levels, "grid of 2^levels + 1 times")->check(CLI::Range(2u, 12u));
  smooth->add_option("--out", out, "report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (run->parsed()) return run_config(config, out_dir, "", seed);
    for (const auto& [cmd, type] : filtered_cmds) {
      if (cmd->parsed()) return run_config(config, out_dir, type, seed);
    }
    if (coeffs_cmd->parsed()) {
      const lorot::coeffs::CoeffParams p{K, N, t, theta};
      const auto v = kind == "tau" ? lorot::coeffs::tau_coeff(p) : lorot::coeffs::sigma(p);
      std::cout << v << "\n";
      return kExitPass;
    }
    if (transport->parsed()) {
      std::ifstream in(config);
      if (!in) throw lorot::ConfigError("cannot read " + config);
      const auto inst = lorot::transport_instance_from_json(nlohmann::json::parse(in));
      const auto kernel = lorot::minkowski_kernel(inst.mu0.atoms.at(0).dim() - 1);
      const auto result = lorot::solve_lp_optimal(inst.mu0, inst.mu1, inst.p, kernel);
      nlohmann::json j = {{"objective", lorot::to_json(result.objective)},
                          {"feasible", result.feasible},
                          {"chronological", result.coupling.chronological},
                          {"monge_defect", result.monge_defect},
                          {"pivots", result.pivots}};
      if (result.feasible) {
        j["l_p"] = lorot::to_json(lorot::lp_cost(result.coupling, inst.mu0, inst.mu1, inst.p, kernel));
      }
      std::cout << j.dump(2) << "\n";
      if (!csv.empty()) lorot::write_atomic(csv, lorot::coupling_to_csv(result.coupling));
      return kExitPass;
    }
    if (bm->parsed()) {
      // Window: time [0, gap + 2 max side], space [-max side, max side].
      const double s = std::max(side0, side1);
      const double c0 = s;  // center time of A0
      const lorot::Box window{{{0.0, gap + 2.0 * s}, {-s, s}}};
      const auto space = lorot::SampledSpace::grid(window, {res, res});
      const lorot::Box a0{{{c0 - side0 / 2, c0 + side0 / 2}, {-side0 / 2, side0 / 2}}};
      const lorot::Box a1{{{c0 + gap - side1 / 2, c0 + gap + side1 / 2}, {-side1 / 2, side1 / 2}}};
      lorot::CheckOptions opt;
      opt.eps = 0.02;
      const auto report = lorot::brunn_minkowski(space.indices_in_box(a0), space.indices_in_box(a1), t, K, nprimes,
                                                 lorot::minkowski_kernel(1), lorot::minkowski_oracle(), space, opt);
      return emit(report, out);
    }
    if (bg->parsed()) {
      if (!(r < R && R < T)) throw lorot::ConfigError("bishop-gromov: need r < R < T");
      const double h = T / static_cast<double>(bg_res);
      // Shifted by half a cell so the apex (0, 0) sits on a cell center.
      const lorot::Box window{{{-h / 2, T - h / 2}, {-T / 2, T / 2}}};
      const auto space = lorot::SampledSpace::grid(window, {bg_res, bg_res});
      const lorot::Event x{0.0, 0.0};
      const auto kernel = lorot::minkowski_kernel(1);
      const auto E = lorot::causal_diamond(space, kernel, x, lorot::Event{T, 0.0});
      lorot::CheckOptions opt;
      opt.eps = 0.02;
      const auto report = lorot::bishop_gromov(x, E, r, R, K, N, delta, space, kernel, lorot::minkowski_oracle(), opt);
      return emit(report, out);
    }
    if (smooth->parsed()) {
      const auto grid = lorot::dyadic_grid(levels);
      std::vector<lorot::smooth::JSample> samples;
      if (coefficient == "tau") {
        const auto roots = lorot::smooth::tau_equality_root(K, N, theta, j0, j1, grid);
        for (std::size_t k = 0; k < grid.size(); ++k) samples.push_back({grid[k], std::pow(roots[k], N)});
      } else {
        samples = lorot::smooth::sigma_equality_jacobian(K, N, theta, j0, j1, grid);
      }
      const auto report = lorot::smooth::verify_distortion_concavity(
          samples, theta, K, N, coefficient == "tau" ? lorot::smooth::Coefficient::tau : lorot::smooth::Coefficient::sigma);
      return emit(report, out);
    }
  } catch (const lorot::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const lorot::DualizabilityError& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
