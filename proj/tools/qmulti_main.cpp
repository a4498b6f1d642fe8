#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "qm/scenario.hpp"

namespace {

// Exit codes: 0 all pass, 1 verification failure, 2 parse/validation error.
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitParse = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qm::ValidationError("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int emit(const qm::Report& report, const std::string& format) {
  if (format == "text")
    std::cout << qm::report_to_text(report);
  else
    std::cout << qm::report_to_json(report).dump(2) << "\n";
  return report.exit_code == 0 ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qmulti: multi-observable / multi-instrument scenario runner"};
  app.require_subcommand(1);

  std::string scenario_path;
  double tol = 1e-9;
  std::string report_format = "structured";
  bool parallel = false;

  CLI::App* run = app.add_subcommand("run", "run a scenario document");
  run->add_option("scenario", scenario_path, "scenario file (JSON)")
      ->required();
  run->add_option("--tol", tol, "default tolerance (default 1e-9)");
  run->add_option("--report", report_format, "report format")
      ->check(CLI::IsMember({"text", "structured"}));
  run->add_flag("--parallel", parallel,
                "run independent tasks concurrently");

  std::string task_name;
  std::uint64_t trajectories = 0;
  std::uint64_t seed = 0;

  CLI::App* sample = app.add_subcommand("sample", "run one sample task");
  sample->add_option("scenario", scenario_path, "scenario file (JSON)")
      ->required();
  sample->add_option("--task", task_name, "name of the sample task")
      ->required();
  sample->add_option("--trajectories", trajectories, "trajectory count");
  sample->add_option("--seed", seed, "PRNG seed");
  sample->add_option("--tol", tol, "default tolerance (default 1e-9)");
  sample->add_option("--report", report_format, "report format")
      ->check(CLI::IsMember({"text", "structured"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    const qm::Scenario scenario =
        qm::parse_scenario_text(read_file(scenario_path), qm::Tolerance{tol});

    if (run->parsed()) {
      qm::RunOptions opts;
      opts.parallel = parallel;
      return emit(qm::run_scenario(scenario, opts), report_format);
    }

    // sample: run the named task plus the producers it depends on.
    std::size_t target = scenario.tasks.size();
    for (std::size_t i = 0; i < scenario.tasks.size(); ++i)
      if (scenario.tasks[i].name == task_name) {
        target = i;
        break;
      }
    if (target == scenario.tasks.size())
      throw qm::ValidationError("no task named \"" + task_name + "\"");
    if (scenario.tasks[target].kind != "sample")
      throw qm::ValidationError("task \"" + task_name +
                                "\" is not a sample task");
    std::set<std::string> needed(scenario.tasks[target].references.begin(),
                                 scenario.tasks[target].references.end());
    std::vector<bool> keep(scenario.tasks.size(), false);
    keep[target] = true;
    for (std::size_t i = target; i-- > 0;) {
      const qm::ScenarioTask& t = scenario.tasks[i];
      if (t.store && needed.count(*t.store)) {
        keep[i] = true;
        needed.insert(t.references.begin(), t.references.end());
      }
    }
    qm::Scenario one = scenario;
    one.tasks.clear();
    for (std::size_t i = 0; i < scenario.tasks.size(); ++i)
      if (keep[i]) one.tasks.push_back(scenario.tasks[i]);
    qm::RunOptions opts;
    if (sample->count("--seed")) opts.sample_seed = seed;
    if (sample->count("--trajectories")) opts.sample_trajectories = trajectories;
    return emit(qm::run_scenario(one, opts), report_format);
  } catch (const qm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
}
