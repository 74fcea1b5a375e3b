// gossip-sim: command-line front end for runs, replay and the equilibrium checks.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gossip/equilibrium.hpp"
#include "gossip/runner.hpp"
#include "gossip/scheduler.hpp"

namespace {

using namespace gossip;
using nlohmann::json;

int cmd_run(const std::string& path, const std::vector<std::uint64_t>& seeds, bool dry_run,
            const std::string& output_dir) {
  RunConfig cfg = load_config(path);
  if (!seeds.empty()) cfg.seeds = seeds;
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  validate(cfg);
  if (dry_run) {
    for (auto seed : cfg.seeds) (void)build_schedule(cfg, seed);
    std::cout << config_to_json(cfg).dump(2) << "\n";
    return 0;
  }
  const RunArtifacts art = run_experiment(cfg);
  std::cout << "events:  " << art.event_log.string() << "\n"
            << "summary: " << art.summary_csv.string() << "\n"
            << "agents:  " << art.agents_csv.string() << "\n"
            << "config:  " << art.config_snapshot.string() << "\n";
  if (art.transcripts) std::cout << "transcripts: " << art.transcripts->string() << "\n";
  return 0;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_replay(const std::string& log, const std::string& csv) {
  const ReplayResult r = replay(log);
  std::cout << r.summary_csv;
  std::filesystem::path stored = csv.empty()
                                     ? std::filesystem::path(log).parent_path() / "summary.csv"
                                     : std::filesystem::path(csv);
  if (!std::filesystem::exists(stored)) {
    if (!csv.empty()) throw Error(ErrorCode::Io, "no such file " + stored.string());
    return 0;
  }
  if (read_file(stored) != r.summary_csv) {
    std::cerr << "replay: recomputed summary differs from " << stored.string() << "\n";
    return 1;
  }
  std::cerr << "replay: matches " << stored.string() << "\n";
  return 0;
}

int cmd_metrics(const std::string& log) {
  const ReplayResult r = replay(log);
  const auto& columns = summary_columns();
  json out = json::array();
  for (const auto& s : r.seeds) {
    json row = {{"seed", s.seed}};
    const auto fields = summary_fields(s.summary);
    for (std::size_t i = 0; i < fields.size() && i + 2 < columns.size(); ++i) {
      row[columns[i + 2]] = fields[i];
    }
    out.push_back(row);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::vector<std::string>& args, bool truncated, int horizon) {
  if (args.empty()) throw Error(ErrorCode::InvalidArgument, "missing profile name");
  DeviationSetup setup;
  setup.params.horizon_type = HorizonType::InfiniteTruncated;
  std::string profile_name;
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      if (!profile_name.empty()) throw Error(ErrorCode::InvalidArgument, "two profile names given");
      profile_name = a;
      continue;
    }
    const std::string key = a.substr(0, eq);
    const std::string value = a.substr(eq + 1);
    if (key == "gamma" || key == "\xce\xb3") setup.params.discount = std::stod(value);
    else if (key == "b") setup.params.benefit = std::stod(value);
    else if (key == "c") setup.params.cost = std::stod(value);
    else if (key == "n") setup.params.n_agents = std::stoi(value);
    else if (key == "T") setup.params.horizon_length = std::stoi(value);
    else if (key == "horizon") setup.params.horizon_type = parse_horizon(value);
    else if (key == "game") setup.game = parse_matrix_game(value);
    else if (key == "monitoring") setup.monitoring = parse_monitoring(value);
    else throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + key + "'");
  }
  if (profile_name.empty()) throw Error(ErrorCode::InvalidArgument, "missing profile name");
  setup.params.validate();

  CheckMode mode;
  mode.kind = truncated ? CheckMode::Truncated : CheckMode::ClosedForm;
  mode.horizon = horizon;
  const auto reports = one_shot_deviation_check(abstract_profile_by_name(profile_name), setup, mode);
  for (const auto& r : reports) {
    std::cout << to_string(r.state);
    if (r.remaining > 0) std::cout << " k=" << r.remaining;
    std::cout << " on_path=" << format_double(r.value_on_path)
              << " deviation=" << format_double(r.value_deviation)
              << " margin=" << format_double(r.margin) << (r.spe_holds ? " ok" : " PROFITABLE")
              << "\n";
  }
  if (setup.params.horizon_type == HorizonType::InfiniteTruncated && setup.params.discount < 1.0) {
    std::cout << "grim value " << format_double(grim_cooperation_value(setup.params.discount,
                                                                      setup.params.benefit,
                                                                      setup.params.cost))
              << "\n";
  }
  const bool holds = spe_holds(reports);
  std::cout << (holds ? "SPE holds" : "profitable one-shot deviation") << "\n";
  return holds ? 0 : 1;
}

int cmd_schedule_check(const std::string& mode_name, std::size_t n, int T, std::uint64_t seed,
                       bool quiet) {
  const ScheduleMode mode = parse_schedule_mode(mode_name);
  Schedule s;
  switch (mode) {
    case ScheduleMode::Donation: s = donation_schedule(n, T, seed); break;
    case ScheduleMode::Simultaneous: s = simultaneous_schedule(n, T, seed); break;
    case ScheduleMode::Partition: s = partition_schedule(n, T, seed); break;
    case ScheduleMode::BipartiteSingle:
    case ScheduleMode::BipartiteFull: {
      // First half sellers, second half buyers.
      std::vector<AgentIndex> sellers, buyers;
      for (AgentIndex i = 0; i < n; ++i) (i < n / 2 ? sellers : buyers).push_back(i);
      s = bipartite_schedule(sellers, buyers, T, seed, mode);
      break;
    }
  }
  if (!quiet) std::cout << serialize(s);
  const auto problems = check_schedule(s);
  for (const auto& p : problems) std::cerr << "violation: " << p << "\n";
  return problems.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gossip-driven indirect reciprocity simulator"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  std::vector<std::uint64_t> seed_override;
  bool dry_run = false;
  auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed-override", seed_override, "replace the configured seeds");
  run->add_option("--output-dir", output_dir, "replace the configured output directory");
  run->add_flag("--dry-run", dry_run, "validate the config and schedules only");

  std::string log_path, csv_path;
  auto* rep = app.add_subcommand("replay", "Recompute the summary from an event log");
  rep->add_option("log", log_path, "events.jsonl")->required();
  rep->add_option("--csv", csv_path, "summary.csv to compare against (default: next to the log)");

  std::string metrics_log;
  auto* met = app.add_subcommand("metrics", "Print per-seed metrics from an event log");
  met->add_option("log", metrics_log, "events.jsonl")->required();

  std::vector<std::string> verify_args;
  bool truncated = false;
  int horizon = kDefaultCheckHorizon;
  auto* ver = app.add_subcommand(
      "verify-equilibrium", "One-shot deviation check, e.g. gamma=0.99 b=5 c=1 grim");
  ver->add_option("args", verify_args, "key=value parameters, then a profile name")->required();
  ver->add_flag("--truncated", truncated, "sum a truncated series instead of solving exactly");
  ver->add_option("--horizon", horizon, "truncation horizon");

  std::string mode_name;
  std::size_t n = 0;
  int T = 0;
  std::uint64_t seed = 0;
  bool quiet = false;
  auto* sc = app.add_subcommand("schedule-check", "Generate a schedule and check its invariants");
  sc->add_option("mode", mode_name)->required();
  sc->add_option("n", n)->required();
  sc->add_option("T", T)->required();
  sc->add_option("seed", seed)->required();
  sc->add_flag("--quiet", quiet, "print violations only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, seed_override, dry_run, output_dir);
    if (*rep) return cmd_replay(log_path, csv_path);
    if (*met) return cmd_metrics(metrics_log);
    if (*ver) return cmd_verify(verify_args, truncated, horizon);
    if (*sc) return cmd_schedule_check(mode_name, n, T, seed, quiet);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
