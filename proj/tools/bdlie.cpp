// Command-line front end. Everything numeric happens behind the C API; this
// file only shuttles files and flags.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "bdlie/bdlie.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 11;

struct Options {
  std::string scenario_path;
  std::string out_dir = ".";
  std::string format;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trajectories;
  std::optional<double> tail_tol;
};

// The fallback scenario lets `bdlie closure` run without a file; the algebra
// questions it answers do not depend on the rates.
const char* kDefaultScenario = R"({
  "spec": {
    "lambda": {"kind": "constant", "params": {"c": 1.0}},
    "mu": {"kind": "constant", "params": {"c": 1.0}},
    "beta": 0.0
  },
  "n0": 1,
  "t_grid": [1.0]
})";

std::string overrides_json(const Options& o) {
  std::ostringstream s;
  bool any = false;
  s << "{";
  auto sep = [&] { if (any) s << ","; any = true; };
  if (!o.format.empty()) {
    sep();
    s << "\"format\":\"" << o.format << "\"";
  }
  if (o.seed) {
    sep();
    s << "\"seed\":" << *o.seed;
  }
  if (o.trajectories) {
    sep();
    s << "\"trajectories\":" << *o.trajectories;
  }
  if (o.tail_tol) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *o.tail_tol);
    sep();
    s << "\"tail_tol\":" << buf;
  }
  s << "}";
  return any ? s.str() : std::string();
}

int run(const std::string& command, const Options& o) {
  std::string text;
  if (!o.scenario_path.empty()) {
    std::ifstream in(o.scenario_path, std::ios::binary);
    if (!in) {
      std::cerr << "bdlie: cannot read " << o.scenario_path << "\n";
      return kExitIo;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  } else if (command == "closure") {
    text = kDefaultScenario;
  } else {
    std::cerr << "bdlie: " << command << " needs --scenario FILE\n";
    return kExitUsage;
  }

  char* err = nullptr;
  bdlie_scenario* sc = nullptr;
  bdlie_status st = bdlie_scenario_parse(text.c_str(), &sc, &err);
  if (st != BDLIE_OK) {
    std::cerr << "bdlie: " << (err ? err : "scenario parse failed") << "\n";
    bdlie_string_free(err);
    return static_cast<int>(st);
  }

  const std::string ov = overrides_json(o);
  bdlie_result* res = nullptr;
  st = bdlie_run(sc, command.c_str(), ov.empty() ? nullptr : ov.c_str(), &res, &err);
  bdlie_scenario_free(sc);
  if (st != BDLIE_OK) {
    std::cerr << "bdlie: " << (err ? err : "run failed") << "\n";
    bdlie_string_free(err);
    return static_cast<int>(st);
  }

  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) {
    std::cerr << "bdlie: cannot create " << o.out_dir << ": " << ec.message() << "\n";
    bdlie_result_free(res);
    return kExitIo;
  }
  int exit_code = bdlie_result_exit_code(res);
  for (size_t i = 0; i < bdlie_result_artifact_count(res); ++i) {
    const std::filesystem::path path =
        std::filesystem::path(o.out_dir) / bdlie_result_artifact_name(res, i);
    std::ofstream out(path, std::ios::binary);
    out << bdlie_result_artifact_text(res, i);
    if (!out) {
      std::cerr << "bdlie: cannot write " << path.string() << "\n";
      bdlie_result_free(res);
      return kExitIo;
    }
    std::cout << "wrote " << path.string() << "\n";
  }
  std::cout << bdlie_result_summary(res) << "\n";
  bdlie_result_free(res);
  return exit_code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact solutions for birth-death processes with immigration"};
  app.set_version_flag("--version", bdlie_version());
  app.require_subcommand(1);

  const struct {
    const char* name;
    const char* help;
    bool needs_scenario;
  } commands[] = {
      {"gauge", "gauge functions over the time grid", true},
      {"pmf", "transition probabilities at each grid time", true},
      {"mean", "closed-form and pmf-summed means", true},
      {"simulate", "stochastic ensemble at the final grid time", true},
      {"oracle", "truncated master-equation distribution", true},
      {"verify", "cross-check every representation against the others", true},
      {"closure", "commutator closure report for the operator sets", false},
  };

  Options opts;
  std::uint64_t seed_v = 0, traj_v = 0;
  double tail_v = 0;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    auto* scen =
        sub->add_option("--scenario", opts.scenario_path, "scenario JSON file")
            ->check(CLI::ExistingFile);
    if (c.needs_scenario) scen->required();
    sub->add_option("--out", opts.out_dir, "output directory (default .)");
    sub->add_option("--format", opts.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", seed_v, "simulation seed override");
    sub->add_option("--trajectories", traj_v, "simulation size override")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tail-tol", tail_v, "pmf tail tolerance override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opts.seed = seed_v;
  if (sub->count("--trajectories")) opts.trajectories = traj_v;
  if (sub->count("--tail-tol")) opts.tail_tol = tail_v;
  return run(sub->get_name(), opts);
}
