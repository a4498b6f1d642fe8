#include "qm/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qm {

namespace {

const std::set<std::string>& known_kinds() {
  static const std::set<std::string> kinds{
      "validate",     "distribution",
      "marginal",     "reduce",
      "tensor",       "sequential",
      "luders",       "holevo",
      "part",         "seq-product",
      "conditioned",  "verify-joint",
      "verify-joint-instrument",  "verify-product-structure",
      "sample"};
  return kinds;
}

// Collects the string values of the fields that may name declarations.
void collect_references(const json& args, std::vector<std::string>& out) {
  static const std::set<std::string> ref_fields{
      "target", "observable", "instrument", "state",  "second",
      "joint",  "observables", "instruments", "targets", "chain"};
  for (const auto& [key, val] : args.items()) {
    if (!ref_fields.count(key)) continue;
    if (val.is_string()) out.push_back(val.get<std::string>());
    else if (val.is_array())
      for (const json& v : val)
        if (v.is_string()) out.push_back(v.get<std::string>());
  }
  if (args.contains("alphas") && args["alphas"].is_object())
    for (const auto& [_, val] : args["alphas"].items())
      if (val.is_string()) out.push_back(val.get<std::string>());
}

}  // namespace

Scenario parse_scenario(const json& doc, Tolerance default_tol) {
  if (!doc.is_object())
    throw ValidationError("scenario: document must be an object");
  Scenario s;
  s.tol = default_tol;
  if (doc.contains("tol")) s.tol.eps = doc["tol"].get<double>();

  std::set<std::string> names;
  auto claim = [&](const std::string& name, const char* what) {
    if (!names.insert(name).second)
      throw ValidationError(std::string("scenario: duplicate name \"") + name +
                            "\" (" + what + ")");
  };

  const json decls =
      doc.contains("declarations") ? doc["declarations"] : json::object();
  if (decls.contains("matrices"))
    for (const auto& [name, val] : decls["matrices"].items()) {
      claim(name, "matrix");
      try {
        s.matrices.emplace(name, matrix_from_json(val));
      } catch (const Error& e) {
        throw ValidationError("declaration \"" + name + "\": " + e.what());
      }
    }
  if (decls.contains("states"))
    for (const auto& [name, val] : decls["states"].items()) {
      claim(name, "state");
      try {
        s.states.emplace(name, state_from_json(val, s.tol));
      } catch (const Error& e) {
        throw ValidationError("declaration \"" + name + "\": " + e.what());
      }
    }
  if (decls.contains("observables"))
    for (const auto& [name, val] : decls["observables"].items()) {
      claim(name, "observable");
      try {
        s.observables.emplace(name, observable_from_json(val, s.tol));
      } catch (const Error& e) {
        throw ValidationError("declaration \"" + name + "\": " + e.what());
      }
    }
  if (decls.contains("instruments"))
    for (const auto& [name, val] : decls["instruments"].items()) {
      claim(name, "instrument");
      try {
        s.instruments.emplace(name, instrument_from_json(val, s.tol));
      } catch (const Error& e) {
        throw ValidationError("declaration \"" + name + "\": " + e.what());
      }
    }

  if (!doc.contains("tasks") || !doc["tasks"].is_array())
    throw ValidationError("scenario: missing tasks array");

  // Producer bookkeeping for wave scheduling: name -> producing task index.
  std::map<std::string, std::size_t> producer;
  std::size_t index = 0;
  for (const json& t : doc["tasks"]) {
    ++index;
    if (!t.is_object() || !t.contains("kind"))
      throw ValidationError("task " + std::to_string(index) +
                            ": expected an object with a kind");
    ScenarioTask task;
    task.kind = t["kind"].get<std::string>();
    if (!known_kinds().count(task.kind))
      throw ValidationError("task " + std::to_string(index) +
                            ": unknown kind \"" + task.kind + "\"");
    task.name = t.contains("name") ? t["name"].get<std::string>()
                                   : "task-" + std::to_string(index);
    task.args = t;
    task.tol = t.contains("tol") ? t["tol"].get<double>() : s.tol.eps;
    if (t.contains("expected")) task.expected = t["expected"];
    if (t.contains("store")) {
      task.store = t["store"].get<std::string>();
      claim(*task.store, "stored result");
    }
    collect_references(t, task.references);
    std::size_t wave = 0;
    for (const std::string& ref : task.references) {
      if (!names.count(ref))
        throw ValidationError("task " + std::to_string(index) + " (\"" +
                              task.name + "\"): unknown name \"" + ref + "\"");
      const auto it = producer.find(ref);
      if (it != producer.end())
        wave = std::max(wave, s.tasks[it->second].wave + 1);
    }
    task.wave = wave;
    if (task.store) producer[*task.store] = s.tasks.size();
    s.tasks.push_back(std::move(task));
  }
  return s;
}

Scenario parse_scenario_text(const std::string& text, Tolerance default_tol) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: JSON syntax error: ") +
                          e.what());
  }
  return parse_scenario(doc, default_tol);
}

namespace {

using Stored = std::variant<Observable, Instrument>;

struct Env {
  const Scenario* scenario = nullptr;
  std::map<std::string, Stored> stored;
  Tolerance tol;

  ComplexMatrix matrix(const json& ref) const {
    if (ref.is_string()) {
      const std::string name = ref.get<std::string>();
      const auto it = scenario->matrices.find(name);
      if (it != scenario->matrices.end()) return it->second;
      const auto st = scenario->states.find(name);
      if (st != scenario->states.end()) return st->second.matrix();
      throw ValidationError("unknown matrix \"" + name + "\"");
    }
    return matrix_from_json(ref);
  }

  State state(const json& ref) const {
    if (ref.is_string()) {
      const std::string name = ref.get<std::string>();
      const auto it = scenario->states.find(name);
      if (it != scenario->states.end()) return it->second;
      const auto mt = scenario->matrices.find(name);
      if (mt != scenario->matrices.end()) return State(mt->second, tol);
      throw ValidationError("unknown state \"" + name + "\"");
    }
    return state_from_json(ref, tol);
  }

  Observable observable(const json& ref) const {
    if (ref.is_string()) {
      const std::string name = ref.get<std::string>();
      const auto it = scenario->observables.find(name);
      if (it != scenario->observables.end()) return it->second;
      const auto st = stored.find(name);
      if (st != stored.end()) {
        if (const Observable* o = std::get_if<Observable>(&st->second))
          return *o;
        throw ValidationError("name \"" + name + "\" is not an observable");
      }
      throw ValidationError("unknown observable \"" + name + "\"");
    }
    return observable_from_json(ref, tol);
  }

  Instrument instrument(const json& ref) const {
    if (ref.is_string()) {
      const std::string name = ref.get<std::string>();
      const auto it = scenario->instruments.find(name);
      if (it != scenario->instruments.end()) return it->second;
      const auto st = stored.find(name);
      if (st != stored.end()) {
        if (const Instrument* i = std::get_if<Instrument>(&st->second))
          return *i;
        throw ValidationError("name \"" + name + "\" is not an instrument");
      }
      throw ValidationError("unknown instrument \"" + name + "\"");
    }
    return instrument_from_json(ref, tol);
  }
};

OutcomeMap outcome_map_from_json(const OutcomeSpace& source, const json& spec) {
  if (!spec.is_object() || !spec.contains("map"))
    throw ValidationError("outcome map: expected {map, target_axes?}");
  const json& m = spec["map"];
  // Target labels: explicit axes, or single axis in first-appearance order
  // over canonical source outcomes.
  std::vector<std::vector<std::string>> target_axes;
  if (spec.contains("target_axes")) {
    for (const json& ax : spec["target_axes"])
      target_axes.push_back(ax.get<std::vector<std::string>>());
  } else {
    std::vector<std::string> labels;
    for (std::size_t x = 0; x < source.outcome_count(); ++x) {
      const std::string key = join_outcome(source.outcome_at(x));
      if (!m.contains(key))
        throw ValidationError("outcome map: missing image of \"" + key + "\"");
      const std::string y = m[key].get<std::string>();
      if (std::find(labels.begin(), labels.end(), y) == labels.end())
        labels.push_back(y);
    }
    target_axes.push_back(std::move(labels));
  }
  OutcomeSpace target(target_axes);
  std::vector<std::size_t> idx(source.outcome_count());
  for (std::size_t x = 0; x < source.outcome_count(); ++x) {
    const std::string key = join_outcome(source.outcome_at(x));
    if (!m.contains(key))
      throw ValidationError("outcome map: missing image of \"" + key + "\"");
    idx[x] = target.index_of(
        split_outcome(m[key].get<std::string>(), target.axis_count()));
  }
  return OutcomeMap(source, target, std::move(idx));
}

std::vector<Outcome> delta_from_json(const OutcomeSpace& space, const json& j) {
  std::vector<Outcome> out;
  for (const json& o : j)
    out.push_back(split_outcome(o.get<std::string>(), space.axis_count()));
  return out;
}

double table_deviation(const ProbabilityTable& got, const OutcomeSpace& space,
                       const json& expected) {
  double dev = 0.0;
  std::size_t matched = 0;
  for (const auto& [key, val] : expected.items()) {
    const Outcome o = split_outcome(key, space.axis_count());
    const auto it = got.find(o);
    if (it == got.end())
      throw ValidationError("expected table: unknown outcome \"" + key + "\"");
    dev = std::max(dev, std::abs(it->second - val.get<double>()));
    ++matched;
  }
  if (matched != got.size())
    throw ValidationError("expected table: outcome count mismatch");
  return dev;
}

double observable_deviation(const Observable& got, const Observable& want) {
  if (!(got.space() == want.space()) || got.dim() != want.dim())
    throw ValidationError("expected observable: space/dim mismatch");
  double dev = 0.0;
  for (std::size_t i = 0; i < got.outcome_count(); ++i)
    dev = std::max(dev, max_abs_diff(got.effect(i), want.effect(i)));
  return dev;
}

double instrument_deviation(const Instrument& got, const Instrument& want) {
  if (!(got.space() == want.space()) || got.in_dim() != want.in_dim() ||
      got.out_dim() != want.out_dim())
    throw ValidationError("expected instrument: space/dim mismatch");
  double dev = 0.0;
  for (std::size_t i = 0; i < got.outcome_count(); ++i)
    dev = std::max(dev,
                   operation_deviation(got.operation(i), want.operation(i)));
  return dev;
}

json table_to_json(const ProbabilityTable& t) {
  json out = json::object();
  for (const auto& [o, p] : t) out[join_outcome(o)] = p;
  return out;
}

struct TaskOutput {
  TaskResult result;
  std::optional<Stored> stored;
};

std::uint64_t fnv1a(const std::vector<std::size_t>& values) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t v : values) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

TaskOutput run_sample_task(const ScenarioTask& task, const Env& env,
                           const RunOptions& opts) {
  TaskOutput out;
  const json& args = task.args;
  if (!args.contains("chain") || !args.contains("state"))
    throw ValidationError("sample: expected {chain, state, seed?, steps?, "
                          "trajectories?}");
  std::vector<Instrument> stages;
  for (const json& ref : args["chain"]) stages.push_back(env.instrument(ref));
  const std::size_t steps =
      args.contains("steps") ? args["steps"].get<std::size_t>() : 0;
  InstrumentChain chain(std::move(stages), steps);
  const State rho0 = env.state(args["state"]);
  std::uint64_t seed =
      args.contains("seed") ? args["seed"].get<std::uint64_t>() : 0;
  std::uint64_t trajectories = args.contains("trajectories")
                                   ? args["trajectories"].get<std::uint64_t>()
                                   : 1000;
  if (opts.sample_seed) seed = *opts.sample_seed;
  if (opts.sample_trajectories) trajectories = *opts.sample_trajectories;

  const BatchResult batch =
      sample_batch(chain, rho0, seed, trajectories, opts.parallel, env.tol);
  const std::vector<double> analytic = chain_distribution(chain, rho0);

  // Pass criterion: every joint frequency within 4 binomial sigmas (with one
  // count of slack so zero-probability outcomes don't trip on rounding).
  const double n = static_cast<double>(trajectories);
  double worst = 0.0;  // deviation in units of the 4-sigma bound
  json empirical = json::object();
  json analytic_json = json::object();
  for (std::size_t i = 0; i < batch.counts.size(); ++i) {
    std::string key;
    for (const Outcome& o : joint_outcome(chain, i)) {
      if (!key.empty()) key += '|';
      std::string flat;
      for (std::size_t c = 0; c < o.size(); ++c) {
        if (c) flat += ',';
        flat += o[c];
      }
      key += flat;
    }
    const double freq = static_cast<double>(batch.counts[i]) / n;
    empirical[key] = freq;
    analytic_json[key] = analytic[i];
    const double sigma =
        std::sqrt(std::max(analytic[i] * (1.0 - analytic[i]), 0.0) / n);
    const double bound = 4.0 * sigma + 1.0 / n;
    worst = std::max(worst, std::abs(freq - analytic[i]) / bound);
  }

  json computed{{"generator", Philox4x32::name},
                {"seed", seed},
                {"trajectories", trajectories},
                {"steps", chain.steps},
                {"empirical", std::move(empirical)},
                {"analytic", std::move(analytic_json)},
                {"bound_fraction", worst}};

  // Reproducibility fingerprint: the first trajectories verbatim (up to 10)
  // plus a hash over their outcome indices.
  std::vector<std::size_t> fingerprint;
  json first = json::array();
  for (std::uint64_t t = 0; t < std::min<std::uint64_t>(trajectories, 10);
       ++t) {
    const TrajectorySample ts = sample_trajectory(chain, rho0, seed, t, env.tol);
    json seq = json::array();
    for (const Outcome& o : ts.outcomes) seq.push_back(join_outcome(o));
    first.push_back(std::move(seq));
    fingerprint.insert(fingerprint.end(), ts.outcome_indices.begin(),
                       ts.outcome_indices.end());
  }
  computed["first_trajectories"] = std::move(first);
  computed["first_trajectories_hash"] = fnv1a(fingerprint);

  out.result.computed = std::move(computed);
  out.result.deviation = worst;
  if (worst > 1.0) {
    out.result.status = "fail";
    out.result.detail = "empirical frequency outside 4-sigma bound";
  } else {
    out.result.status = "pass";
  }
  return out;
}

TaskOutput run_task(const ScenarioTask& task, const Env& env,
                    const RunOptions& opts) {
  const json& args = task.args;
  const Tolerance tol = env.tol;
  TaskOutput out;
  out.result.name = task.name;
  out.result.kind = task.kind;

  auto finish_observable = [&](Observable obs) {
    out.result.computed = observable_to_json(obs);
    if (task.expected) {
      const Observable want = env.observable(*task.expected);
      const double dev = observable_deviation(obs, want);
      out.result.deviation = dev;
      out.result.status = dev <= task.tol ? "pass" : "fail";
      if (dev > task.tol)
        out.result.detail = "deviation " + std::to_string(dev) +
                            " > tol " + std::to_string(task.tol);
    } else {
      out.result.status = "pass";
    }
    if (task.store) out.stored = Stored{std::move(obs)};
  };
  auto finish_instrument = [&](Instrument inst) {
    out.result.computed = instrument_to_json(inst);
    if (task.expected) {
      const Instrument want = env.instrument(*task.expected);
      const double dev = instrument_deviation(inst, want);
      out.result.deviation = dev;
      out.result.status = dev <= task.tol ? "pass" : "fail";
      if (dev > task.tol)
        out.result.detail = "deviation " + std::to_string(dev) +
                            " > tol " + std::to_string(task.tol);
    } else {
      out.result.status = "pass";
    }
    if (task.store) out.stored = Stored{std::move(inst)};
  };

  if (task.kind == "validate") {
    if (!args.contains("target"))
      throw ValidationError("validate: expected {target}");
    const json& ref = args["target"];
    // Re-runs the relevant validation; declarations already validated at
    // parse, so this re-checks stored results and inline literals too.
    std::string what;
    if (ref.is_string()) {
      const std::string name = ref.get<std::string>();
      if (env.scenario->observables.count(name) ||
          (env.stored.count(name) &&
           std::holds_alternative<Observable>(env.stored.at(name)))) {
        const Observable o = env.observable(ref);
        Observable{o.space(), o.effects(), tol};  // re-run the checks
        what = "observable";
      } else if (env.scenario->instruments.count(name) ||
                 env.stored.count(name)) {
        const Instrument i = env.instrument(ref);
        Instrument{i.space(), i.operations(), i.out_factors(), tol};
        what = "instrument";
      } else if (env.scenario->states.count(name)) {
        State{env.state(ref).matrix(), tol};
        what = "state";
      } else if (env.scenario->matrices.count(name)) {
        if (!env.matrix(ref).all_finite())
          throw ValidationError("matrix has non-finite entries");
        what = "matrix";
      } else {
        throw ValidationError("validate: unknown name \"" + name + "\"");
      }
    } else {
      env.observable(ref);  // inline literal: parse-validates
      what = "observable";
    }
    out.result.status = "pass";
    out.result.detail = what + " valid";
    return out;
  }

  if (task.kind == "distribution") {
    const State rho = env.state(args.at("state"));
    ProbabilityTable table;
    OutcomeSpace space;
    if (args.contains("instrument")) {
      const Instrument inst = env.instrument(args["instrument"]);
      space = inst.space();
      if (args.contains("delta")) {
        const double p = instrument_distribution(
            inst, rho, delta_from_json(space, args["delta"]));
        out.result.computed = json{{"probability", p}};
        if (task.expected) {
          const double dev = std::abs(p - task.expected->get<double>());
          out.result.deviation = dev;
          out.result.status = dev <= task.tol ? "pass" : "fail";
        } else {
          out.result.status = "pass";
        }
        return out;
      }
      table = instrument_distribution(inst, rho);
    } else {
      const Observable obs = env.observable(args.at("observable"));
      space = obs.space();
      if (args.contains("delta")) {
        const double p =
            distribution(obs, rho, delta_from_json(space, args["delta"]));
        out.result.computed = json{{"probability", p}};
        if (task.expected) {
          const double dev = std::abs(p - task.expected->get<double>());
          out.result.deviation = dev;
          out.result.status = dev <= task.tol ? "pass" : "fail";
        } else {
          out.result.status = "pass";
        }
        return out;
      }
      table = distribution(obs, rho);
    }
    out.result.computed = table_to_json(table);
    if (task.expected) {
      const double dev = table_deviation(table, space, *task.expected);
      out.result.deviation = dev;
      out.result.status = dev <= task.tol ? "pass" : "fail";
      if (dev > task.tol)
        out.result.detail = "deviation " + std::to_string(dev);
    } else {
      out.result.status = "pass";
    }
    return out;
  }

  if (task.kind == "marginal") {
    const std::size_t axis = args.at("axis").get<std::size_t>();
    if (args.contains("instrument")) {
      finish_instrument(
          instrument_marginal(env.instrument(args["instrument"]), axis, tol));
    } else {
      finish_observable(
          marginal(env.observable(args.at("observable")), axis, tol));
    }
    return out;
  }

  if (task.kind == "reduce") {
    const std::size_t factor = args.at("factor").get<std::size_t>();
    const FactorDims dims(args.at("dims").get<std::vector<std::size_t>>());
    if (args.contains("instrument")) {
      finish_instrument(reduced_instrument(env.instrument(args["instrument"]),
                                           factor, dims, tol));
    } else {
      finish_observable(
          reduced_observable(env.observable(args.at("observable")), factor,
                             dims, tol));
    }
    return out;
  }

  if (task.kind == "tensor") {
    if (args.contains("instruments")) {
      std::vector<Instrument> parts;
      for (const json& ref : args["instruments"])
        parts.push_back(env.instrument(ref));
      finish_instrument(tensor_instruments(parts, tol));
    } else {
      std::vector<Observable> parts;
      for (const json& ref : args.at("observables"))
        parts.push_back(env.observable(ref));
      finish_observable(tensor_observables(parts, tol));
    }
    return out;
  }

  if (task.kind == "sequential") {
    std::vector<Instrument> parts;
    for (const json& ref : args.at("instruments"))
      parts.push_back(env.instrument(ref));
    finish_instrument(sequential_instruments(parts, tol));
    return out;
  }

  if (task.kind == "luders") {
    if (args.contains("observables")) {
      std::vector<Observable> parts;
      for (const json& ref : args["observables"])
        parts.push_back(env.observable(ref));
      finish_observable(luders_sequential(parts, tol));
    } else {
      finish_instrument(
          construct_luders(env.observable(args.at("observable")), tol));
    }
    return out;
  }

  if (task.kind == "holevo") {
    const Observable a = env.observable(args.at("observable"));
    std::map<std::string, State> alphas;
    for (const auto& [key, val] : args.at("alphas").items())
      alphas.emplace(key, env.state(val));
    finish_instrument(construct_holevo(a, alphas, tol));
    return out;
  }

  if (task.kind == "part") {
    if (args.contains("instrument")) {
      const Instrument i = env.instrument(args["instrument"]);
      finish_instrument(
          instrument_part(i, outcome_map_from_json(i.space(), args), tol));
    } else {
      const Observable a = env.observable(args.at("observable"));
      finish_observable(part(a, outcome_map_from_json(a.space(), args), tol));
    }
    return out;
  }

  if (task.kind == "seq-product") {
    finish_observable(seq_product_observables(
        env.observable(args.at("observable")),
        env.instrument(args.at("instrument")),
        env.observable(args.at("second")), tol));
    return out;
  }

  if (task.kind == "conditioned") {
    finish_observable(conditioned_observable(
        env.observable(args.at("second")),
        env.instrument(args.at("instrument")),
        env.observable(args.at("observable")), tol));
    return out;
  }

  if (task.kind == "verify-joint") {
    const Observable joint = env.observable(args.at("joint"));
    std::vector<Observable> targets;
    for (const json& ref : args.at("targets"))
      targets.push_back(env.observable(ref));
    const JointReport report = verify_joint(joint, targets, Tolerance{task.tol});
    out.result.computed =
        json{{"axis_deviation", report.axis_deviation},
             {"max_deviation", report.max_deviation}};
    out.result.deviation = report.max_deviation;
    out.result.status = report.pass ? "pass" : "fail";
    out.result.detail = report.detail;
    return out;
  }

  if (task.kind == "verify-joint-instrument") {
    const Instrument joint = env.instrument(args.at("joint"));
    std::vector<Instrument> targets;
    for (const json& ref : args.at("targets"))
      targets.push_back(env.instrument(ref));
    const JointInstrumentReport report =
        verify_joint_instrument(joint, targets, Tolerance{task.tol});
    out.result.computed =
        json{{"target_deviation", report.target_deviation},
             {"measured_marginal_deviation", report.measured_marginal_deviation},
             {"max_deviation", report.max_deviation}};
    out.result.deviation = report.max_deviation;
    out.result.status = report.pass ? "pass" : "fail";
    out.result.detail = report.detail;
    return out;
  }

  if (task.kind == "verify-product-structure") {
    const Observable a = env.observable(args.at("observable"));
    std::vector<OutcomeMap> fs;
    for (const json& spec : args.at("maps"))
      fs.push_back(outcome_map_from_json(a.space(), spec));
    const ProductStructureReport report =
        verify_product_structure(a, fs, Tolerance{task.tol});
    json bijection = json::object();
    if (report.pass)
      for (std::size_t x = 0; x < report.bijection.size(); ++x)
        bijection[join_outcome(a.space().outcome_at(x))] = join_outcome(
            report.product_space.outcome_at(report.bijection[x]));
    out.result.computed = json{
        {"bijection", std::move(bijection)},
        {"max_marginal_deviation", report.max_marginal_deviation}};
    out.result.deviation = report.max_marginal_deviation;
    out.result.status = report.pass ? "pass" : "fail";
    out.result.detail = report.detail;
    return out;
  }

  if (task.kind == "sample") {
    TaskOutput sample_out = run_sample_task(task, env, opts);
    sample_out.result.name = task.name;
    sample_out.result.kind = task.kind;
    return sample_out;
  }

  throw ValidationError("unknown task kind \"" + task.kind + "\"");
}

}  // namespace

Report run_scenario(const Scenario& s, const RunOptions& opts) {
  Report report;
  report.tasks.resize(s.tasks.size());
  Env env;
  env.scenario = &s;
  env.tol = s.tol;

  std::size_t begin = 0;
  while (begin < s.tasks.size()) {
    // One wave: maximal run of consecutive tasks on the same level. Tasks in
    // a wave are independent of each other, so they may run concurrently.
    std::size_t end = begin + 1;
    while (end < s.tasks.size() && s.tasks[end].wave == s.tasks[begin].wave)
      ++end;
    std::vector<TaskOutput> outputs(end - begin);

    auto run_one = [&](std::size_t k) {
      const ScenarioTask& task = s.tasks[begin + k];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        outputs[k] = run_task(task, env, opts);
      } catch (const Error& e) {
        outputs[k].result.status = "error";
        outputs[k].result.detail = e.what();
      } catch (const json::exception& e) {
        outputs[k].result.status = "error";
        outputs[k].result.detail = std::string("bad task arguments: ") + e.what();
      }
      outputs[k].result.name = task.name;
      outputs[k].result.kind = task.kind;
      const auto t1 = std::chrono::steady_clock::now();
      outputs[k].result.elapsed_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
    };

    if (opts.parallel && end - begin > 1) {
#pragma omp parallel for schedule(dynamic)
      for (std::int64_t k = 0; k < static_cast<std::int64_t>(end - begin); ++k)
        run_one(static_cast<std::size_t>(k));
    } else {
      for (std::size_t k = 0; k < end - begin; ++k) run_one(k);
    }

    for (std::size_t k = 0; k < end - begin; ++k) {
      const ScenarioTask& task = s.tasks[begin + k];
      if (task.store && outputs[k].stored)
        env.stored.emplace(*task.store, std::move(*outputs[k].stored));
      report.tasks[begin + k] = std::move(outputs[k].result);
    }
    begin = end;
  }

  const bool all_pass =
      std::all_of(report.tasks.begin(), report.tasks.end(),
                  [](const TaskResult& r) { return r.status == "pass"; });
  report.overall = all_pass ? "pass" : "fail";
  report.exit_code = all_pass ? 0 : 1;
  return report;
}

json report_to_json(const Report& r) {
  json tasks = json::array();
  for (const TaskResult& t : r.tasks) {
    json entry{{"name", t.name},
               {"kind", t.kind},
               {"status", t.status},
               {"elapsed_ms", t.elapsed_ms}};
    if (!t.detail.empty()) entry["detail"] = t.detail;
    if (t.deviation) entry["deviation"] = *t.deviation;
    if (!t.computed.is_null()) entry["computed"] = t.computed;
    tasks.push_back(std::move(entry));
  }
  return json{{"overall", r.overall},
              {"exit_code", r.exit_code},
              {"tasks", std::move(tasks)}};
}

std::string report_to_text(const Report& r) {
  std::ostringstream os;
  for (const TaskResult& t : r.tasks) {
    os << (t.status == "pass" ? "PASS" : t.status == "fail" ? "FAIL" : "ERROR")
       << "  " << t.kind << "  " << t.name;
    if (t.deviation) os << "  (deviation " << *t.deviation << ")";
    if (!t.detail.empty()) os << "  -- " << t.detail;
    os << "  [" << t.elapsed_ms << " ms]\n";
  }
  os << (r.overall == "pass" ? "ALL PASS" : "FAILURES") << "\n";
  return os.str();
}

}  // namespace qm
