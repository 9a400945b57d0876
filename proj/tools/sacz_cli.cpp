// Copyright (c) The sacz authors.
// Licensed under the Apache 2.0 License.

// sacz: run scenarios, sweep parameters, check transcripts and explore the
// feasibility region from the command line.

#include "sacz/feasibility.hpp"
#include "sacz/harness.hpp"
#include "sacz/invariants.hpp"
#include "sacz/simnet.hpp"

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace sacz;

namespace {

// Exit codes.
constexpr int ok = 0;
constexpr int violations_found = 1;
constexpr int bad_input = 2;

std::ofstream open_out(const fs::path& path)
{
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  return out;
}

void report(const harness::RunMetrics& m, std::size_t violations)
{
  std::cerr << m.scenario << ": " << m.completed << '/' << m.requests.size()
            << " completed, " << m.messages << " messages, " << m.fallbacks
            << " fallbacks, " << m.view_changes << " view changes, " << violations
            << " violations\n";
}

int print_violations(const std::vector<Violation>& vs)
{
  for (const auto& v : vs)
    std::cout << v.invariant << " @" << v.index << ": " << v.detail << '\n';
  return vs.empty() ? ok : violations_found;
}

struct RunOpts
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string transcript;
};

int cmd_run(const RunOpts& o)
{
  auto s = harness::load_scenario_file(o.config);
  if (o.seed)
    s.seed = *o.seed;
  auto t = sim::run(s);
  auto m = harness::metrics(t);
  auto vs = check_invariants(t);

  if (!o.transcript.empty())
  {
    auto out = open_out(o.transcript);
    t.write_jsonl(out);
  }
  if (o.out.empty())
    harness::write_csv(std::cout, {m});
  else
  {
    auto out = open_out(o.out);
    harness::write_csv(out, {m});
  }
  report(m, vs.size());
  for (const auto& v : vs)
    std::cerr << "  " << v.invariant << " @" << v.index << ": " << v.detail << '\n';
  return vs.empty() ? ok : violations_found;
}

struct SweepOpts
{
  std::string config;
  std::vector<std::string> params;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string transcript_dir;
  unsigned threads = 0;
};

int cmd_sweep(const SweepOpts& o)
{
  YAML::Node doc;
  try
  {
    doc = YAML::LoadFile(o.config);
  }
  catch (const YAML::Exception& e)
  {
    throw ConfigError(o.config + ": " + e.what());
  }
  if (o.seed)
    doc["seed"] = *o.seed;
  std::vector<harness::SweepParam> params;
  for (const auto& p : o.params)
    params.push_back(harness::parse_sweep_param(p));

  auto scenarios = harness::expand_sweep(doc, params);
  auto results = harness::run_suite(scenarios, o.threads);

  std::vector<harness::RunMetrics> runs;
  std::size_t total_violations = 0;
  for (std::size_t i = 0; i < results.size(); ++i)
  {
    auto& [m, t] = results[i];
    auto vs = check_invariants(t);
    total_violations += vs.size();
    report(m, vs.size());
    if (!o.transcript_dir.empty())
    {
      auto out = open_out(fs::path(o.transcript_dir) / ("run" + std::to_string(i) + ".jsonl"));
      t.write_jsonl(out);
    }
    runs.push_back(std::move(m));
  }
  if (o.out.empty())
    harness::write_csv(std::cout, runs);
  else
  {
    auto out = open_out(o.out);
    harness::write_csv(out, runs);
  }
  return total_violations ? violations_found : ok;
}

int cmd_check(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open " + path);
  auto t = Transcript::read_jsonl(in);
  auto vs = check_invariants(t);
  std::cerr << path << ": " << t.records.size() << " records, " << vs.size()
            << " violations\n";
  return print_violations(vs);
}

int cmd_region(std::uint32_t max_n, const std::string& out_path)
{
  auto rows = feasibility::region_table(max_n);
  if (out_path.empty())
    feasibility::write_region_csv(std::cout, rows);
  else
  {
    auto out = open_out(out_path);
    feasibility::write_region_csv(out, rows);
  }
  return ok;
}

struct WitnessOpts
{
  std::uint32_t n = 0, b = 0, f = 0;
  std::vector<std::uint32_t> placement;
  bool placement_given = false;
  bool contiguous = false;
};

int cmd_witness(const WitnessOpts& o)
{
  feasibility::HybridSystem sys{o.n, o.b, o.f};
  std::cout << "closed_form: " << (feasibility::is_feasible(sys) ? "feasible" : "infeasible")
            << '\n';
  std::optional<feasibility::Witness> w;
  if (o.contiguous)
  {
    w = feasibility::contiguous_witness(sys);
    std::cout << "method: contiguous\n";
  }
  else
  {
    std::optional<feasibility::Parties> placement;
    if (o.placement_given)
      placement = o.placement;
    w = feasibility::brute_force(sys, placement).witness;
    std::cout << "method: exhaustive\n";
  }
  if (!w)
  {
    std::cout << "witness: none\n";
    return ok;
  }
  std::cout << "witness: found\n";
  feasibility::write_witness(std::cout, sys, *w);
  return ok;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"sacz: BFT replication toolkit with a simulated trusted counter"};
  app.require_subcommand(1);

  RunOpts run;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and emit CSV metrics");
  run_cmd->add_option("config", run.config, "Scenario YAML")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run.seed, "Override the scenario seed");
  run_cmd->add_option("--out", run.out, "CSV output path (default: stdout)");
  run_cmd->add_option("--transcript", run.transcript, "Write the JSONL transcript here");

  SweepOpts sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario template over parameter values");
  sweep_cmd->add_option("config", sweep.config, "Scenario YAML template")
    ->required()
    ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--param", sweep.params, "key=lo..hi or key=a,b (repeatable)")
    ->required();
  sweep_cmd->add_option("--seed", sweep.seed, "Override the template seed");
  sweep_cmd->add_option("--out", sweep.out, "CSV output path (default: stdout)");
  sweep_cmd->add_option("--transcript", sweep.transcript_dir,
                        "Directory for one JSONL transcript per run");
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (default: all cores)");

  std::string check_path;
  auto* check_cmd = app.add_subcommand("check", "Check a transcript against every invariant");
  check_cmd->add_option("transcript", check_path, "JSONL transcript")
    ->required()
    ->check(CLI::ExistingFile);

  std::uint32_t max_n = 9;
  std::string region_out;
  auto* region_cmd = app.add_subcommand("region", "Largest tolerable f per (n, b) as CSV");
  region_cmd->add_option("--max-n", max_n, "Largest n")->capture_default_str();
  region_cmd->add_option("--out", region_out, "CSV output path (default: stdout)");

  WitnessOpts witness;
  auto* witness_cmd =
    app.add_subcommand("witness", "Search for two quora meeting only in fully-Byzantine parties");
  witness_cmd->add_option("--n", witness.n, "Parties")->required();
  witness_cmd->add_option("--b", witness.b, "Parties that fail fully-Byzantine")->required();
  witness_cmd->add_option("--f", witness.f, "Fault budget")->required();
  auto* placement_opt = witness_cmd->add_option(
    "--placement", witness.placement, "Fully-Byzantine parties (default: worst case)")
    ->delimiter(',');
  witness_cmd->add_flag("--contiguous", witness.contiguous, "Use the explicit construction")
    ->excludes(placement_opt);

  CLI11_PARSE(app, argc, argv);
  witness.placement_given = placement_opt->count() > 0;

  try
  {
    if (*run_cmd)
      return cmd_run(run);
    if (*sweep_cmd)
      return cmd_sweep(sweep);
    if (*check_cmd)
      return cmd_check(check_path);
    if (*region_cmd)
      return cmd_region(max_n, region_out);
    return cmd_witness(witness);
  }
  catch (const ConfigError& e)
  {
    std::cerr << "config error: " << e.what() << '\n';
  }
  catch (const feasibility::BoundExceeded& e)
  {
    std::cerr << "bound exceeded: " << e.what() << '\n';
  }
  catch (const std::invalid_argument& e)
  {
    std::cerr << "invalid input: " << e.what() << '\n';
  }
  return bad_input;
}
