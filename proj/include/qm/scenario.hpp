#ifndef QM_SCENARIO_HPP
#define QM_SCENARIO_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qm/sampling.hpp"
#include "qm/serialize.hpp"

namespace qm {

// Declarative batch document: named values plus an ordered task list.
// Declarations validate eagerly at parse; tasks may bind results to new
// names via "store" and later tasks may reference them.
struct ScenarioTask {
  std::string name;
  std::string kind;
  json args;
  std::optional<json> expected;
  double tol = 1e-9;
  std::optional<std::string> store;
  std::vector<std::string> references;  // names this task reads
  std::size_t wave = 0;                 // parallel scheduling level
};

struct Scenario {
  std::map<std::string, ComplexMatrix> matrices;
  std::map<std::string, State> states;
  std::map<std::string, Observable> observables;
  std::map<std::string, Instrument> instruments;
  std::vector<ScenarioTask> tasks;
  Tolerance tol;
};

struct TaskResult {
  std::string name;
  std::string kind;
  std::string status;  // "pass" | "fail" | "error"
  std::string detail;
  std::optional<double> deviation;
  json computed;  // null when the task has no value output
  double elapsed_ms = 0.0;
};

struct Report {
  std::vector<TaskResult> tasks;
  std::string overall;  // "pass" | "fail"
  int exit_code = 0;    // 0 all pass, 1 otherwise
};

// Throws ValidationError (with the declaration name / task index in the
// message) on syntax errors, unknown names, or invalid declarations.
Scenario parse_scenario(const json& doc, Tolerance default_tol = {});
Scenario parse_scenario_text(const std::string& text,
                             Tolerance default_tol = {});

struct RunOptions {
  bool parallel = false;
  // Overrides for `qmulti sample`; applied to sample tasks only.
  std::optional<std::uint64_t> sample_seed;
  std::optional<std::uint64_t> sample_trajectories;
};

// Tasks run in order (or wave-parallel); the report is identical either way
// except for elapsed_ms fields.
Report run_scenario(const Scenario& s, const RunOptions& opts = {});

json report_to_json(const Report& r);
std::string report_to_text(const Report& r);

}  // namespace qm

#endif
