// pcs: run, replay and validate pulse schedules.
//
//   pcs run <schedule> [--out <path>] [--set key=value ...] [--until <s>]
//   pcs replay <trace> <schedule> [--out <path>] [--check]
//   pcs validate <schedule>
//
// Exit codes: 0 clean, 2 disrupted, 3 soft shutdown completed, 64 config
// error, 74 I/O error, 1 replay mismatch (with --check).

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pcs/config.hpp"
#include "pcs/harness.hpp"

namespace {

constexpr int kExitConfig = 64;
constexpr int kExitIo = 74;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<pcs::Override> parse_sets(const std::vector<std::string>& sets) {
  std::vector<pcs::Override> out;
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw pcs::ConfigError(fmt::format("--set '{}': expected key=value", s));
    }
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

pcs::PulseSchedule load_checked(const std::string& path, const std::vector<pcs::Override>& overrides) {
  auto schedule = pcs::load_schedule(path, overrides);
  const auto diags = pcs::validate(schedule);
  for (const auto& d : diags) std::cerr << d.to_string() << '\n';
  if (pcs::has_errors(diags)) throw pcs::ConfigError(fmt::format("{}: schedule is invalid", path));
  return schedule;
}

int cmd_run(const std::string& path, const std::string& out_path, const std::vector<std::string>& sets,
            std::optional<double> until) {
  const auto schedule = load_checked(path, parse_sets(sets));
  if (until && !(*until >= 0.0)) throw pcs::ConfigError("--until must be non-negative");

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty() && out_path != "-") {
    file.open(out_path, std::ios::binary);
    if (!file) throw IoError(fmt::format("cannot open '{}' for writing", out_path));
    out = &file;
  }
  const auto result = pcs::run(schedule, *out, pcs::RunOptions{until});
  out->flush();
  if (!*out) throw IoError("failed writing trace");

  std::cerr << fmt::format("ticks {} violations {}", result.ticks, result.violations);
  if (result.disruption_time) std::cerr << fmt::format(" disruption at t={}", *result.disruption_time);
  std::cerr << '\n';
  return static_cast<int>(result.outcome);
}

int cmd_replay(const std::string& trace_path, const std::string& schedule_path, const std::string& out_path,
               bool check) {
  const auto schedule = load_checked(schedule_path, {});
  std::ifstream in(trace_path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", trace_path));

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty() && out_path != "-") {
    file.open(out_path, std::ios::binary);
    if (!file) throw IoError(fmt::format("cannot open '{}' for writing", out_path));
    out = &file;
  }
  const auto result = pcs::replay(in, schedule, *out);
  for (const auto& m : result.messages) std::cerr << m << '\n';
  std::cerr << fmt::format("rows {} mismatches {}\n", result.rows, result.mismatches);
  return check && result.mismatches > 0 ? 1 : 0;
}

int cmd_validate(const std::string& path) {
  const auto schedule = pcs::load_schedule(path);
  const auto diags = pcs::validate(schedule);
  for (const auto& d : diags) std::cout << d.to_string() << '\n';
  if (pcs::has_errors(diags)) return kExitConfig;
  std::cout << "ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervisory plasma control: run, replay and validate pulse schedules"};
  app.require_subcommand(1);

  std::string schedule_path, trace_path, out_path;
  std::vector<std::string> sets;
  std::optional<double> until;
  bool check = false;

  auto* run = app.add_subcommand("run", "simulate a schedule against the plant surrogate");
  run->add_option("schedule", schedule_path, "pulse schedule (YAML)")->required();
  run->add_option("--out", out_path, "trace CSV (default stdout)");
  run->add_option("--set", sets, "override a schedule entry, e.g. run.duration=2");
  run->add_option("--until", until, "stop after this many seconds");

  auto* rep = app.add_subcommand("replay", "re-run the supervisor over a recorded trace");
  rep->add_option("trace", trace_path, "trace CSV")->required();
  rep->add_option("schedule", schedule_path, "pulse schedule (YAML)")->required();
  rep->add_option("--out", out_path, "decision CSV (default stdout)");
  rep->add_flag("--check", check, "exit 1 when decisions differ from the trace");

  auto* val = app.add_subcommand("validate", "check a schedule");
  val->add_option("schedule", schedule_path, "pulse schedule (YAML)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(schedule_path, out_path, sets, until);
    if (*rep) return cmd_replay(trace_path, schedule_path, out_path, check);
    return cmd_validate(schedule_path);
  } catch (const pcs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
