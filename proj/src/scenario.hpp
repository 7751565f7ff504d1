#pragma once

// Scenario files and the command layer shared by the C API and the CLI.
//
// A scenario is a JSON description of one process plus the run parameters;
// run_command turns (command, scenario) into named text artifacts and an
// exit code, so every front end reports identical results.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rates.hpp"

namespace bdlie {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,       // bad command line or a command lacking its inputs
  kParse = 2,       // malformed scenario or invalid parameter values
  kDomain = 3,      // evaluation outside a rate's domain
  kIntegration = 4, // adaptive integration stalled
  kOverflow = 5,    // an exponent left double range
  kSingular = 6,    // velocity map singular
  kTruncation = 7,  // state-space truncation failed to converge
  kTail = 8,        // tail mass too heavy for the request
  kNotClosed = 9,   // commutator left the candidate span
  kVerifyFailed = 10,
  kIo = 11,         // front-end file I/O
  kInternal = 12,
};

struct SsaSettings {
  std::size_t trajectories = 100000;
  std::uint64_t seed = 1;
};

struct Scenario {
  ProcessSpec spec;
  long n0 = 1;
  std::vector<double> t_grid;
  double tail_tol = 1e-10;
  std::optional<SsaSettings> ssa;
  std::string format = "csv"; // "csv" or "json"
};

// Throws std::invalid_argument listing every violation (unknown keys are
// rejected at every nesting level).
Scenario parse_scenario(const std::string& json_text);

// Parses a bare spec object {"lambda": ..., "mu": ..., "beta": ...} with the
// same strictness.
ProcessSpec parse_process_spec(const std::string& json_text);

// Canonical re-serialization (fixed key order, default keys included).
std::string scenario_to_json(const Scenario& sc);

struct Artifact {
  std::string name; // suggested file name, e.g. "gauge.csv"
  std::string text;
};

struct RunResult {
  std::vector<Artifact> artifacts;
  int exit_code = kOk;
  std::string summary; // one line for the terminal
};

struct RunOverrides {
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  std::optional<double> tail_tol;
};

// Commands: gauge, pmf, mean, simulate, oracle, verify, closure. Failures
// surface as an "<command>_error.json" artifact plus the mapped exit code;
// artifacts produced before the failure are kept.
RunResult run_command(const std::string& command, const Scenario& sc,
                      const RunOverrides& ov = {});

const std::vector<std::string>& command_names();

// Exception -> exit code (used by run_command and the C API).
int classify_error(const std::exception& e);

} // namespace bdlie
