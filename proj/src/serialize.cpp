#include "qm/serialize.hpp"

namespace qm {

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c)
      row.push_back(json::array({m.at(r, c).real(), m.at(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw ValidationError("matrix literal: expected a nonempty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ValidationError("matrix literal: empty row");
  ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols)
      throw ValidationError("matrix literal: ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      const json& e = row[c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
          !e[1].is_number())
        throw ValidationError(
            "matrix literal: entry must be a two-element [re, im] array");
      m.at(r, c) = cplx{e[0].get<double>(), e[1].get<double>()};
    }
  }
  if (!m.all_finite())
    throw ValidationError("matrix literal: non-finite entry");
  return m;
}

namespace {

std::vector<std::vector<std::string>> axes_from_json(const json& j,
                                                     const char* what) {
  if (!j.is_array() || j.empty())
    throw ValidationError(std::string(what) + ": expected nonempty axes array");
  std::vector<std::vector<std::string>> axes;
  for (const json& ax : j) {
    if (!ax.is_array())
      throw ValidationError(std::string(what) + ": axis must be a label array");
    std::vector<std::string> labels;
    for (const json& l : ax) {
      if (!l.is_string())
        throw ValidationError(std::string(what) + ": label must be a string");
      labels.push_back(l.get<std::string>());
    }
    axes.push_back(std::move(labels));
  }
  return axes;
}

json axes_to_json(const OutcomeSpace& space) {
  json axes = json::array();
  for (const auto& ax : space.axes()) axes.push_back(ax);
  return axes;
}

}  // namespace

json observable_to_json(const Observable& a) {
  json effects = json::object();
  for (std::size_t i = 0; i < a.outcome_count(); ++i)
    effects[join_outcome(a.space().outcome_at(i))] =
        matrix_to_json(a.effect(i));
  return json{{"dim", a.dim()},
              {"axes", axes_to_json(a.space())},
              {"effects", std::move(effects)}};
}

Observable observable_from_json(const json& j, Tolerance tol) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("axes") ||
      !j.contains("effects"))
    throw ValidationError("observable: expected {dim, axes, effects}");
  OutcomeSpace space(axes_from_json(j["axes"], "observable"));
  std::map<std::string, ComplexMatrix> effects;
  for (const auto& [key, val] : j["effects"].items())
    effects.emplace(key, matrix_from_json(val));
  return validate_observable(space, effects, j["dim"].get<std::size_t>(), tol);
}

json state_to_json(const State& s) { return matrix_to_json(s.matrix()); }

State state_from_json(const json& j, Tolerance tol) {
  return State(matrix_from_json(j), tol);
}

json instrument_to_json(const Instrument& i) {
  json ops = json::object();
  for (std::size_t x = 0; x < i.outcome_count(); ++x) {
    json list = json::array();
    for (const ComplexMatrix& k : i.operation(x).kraus())
      list.push_back(matrix_to_json(k));
    ops[join_outcome(i.space().outcome_at(x))] = std::move(list);
  }
  json out{{"space", axes_to_json(i.space())},
           {"in_dim", i.in_dim()},
           {"out_dim", i.out_dim()},
           {"operations", std::move(ops)}};
  if (i.out_factors()) out["out_factors"] = i.out_factors()->dims;
  return out;
}

Instrument instrument_from_json(const json& j, Tolerance tol) {
  if (!j.is_object() || !j.contains("space") || !j.contains("in_dim") ||
      !j.contains("out_dim") || !j.contains("operations"))
    throw ValidationError(
        "instrument: expected {space, in_dim, out_dim, operations}");
  OutcomeSpace space(axes_from_json(j["space"], "instrument"));
  std::map<std::string, std::vector<ComplexMatrix>> ops;
  for (const auto& [key, val] : j["operations"].items()) {
    if (!val.is_array() || val.empty())
      throw ValidationError("instrument: operation \"" + key +
                            "\" must be a nonempty Kraus list");
    std::vector<ComplexMatrix> kraus;
    for (const json& k : val) kraus.push_back(matrix_from_json(k));
    ops.emplace(key, std::move(kraus));
  }
  std::optional<FactorDims> factors;
  if (j.contains("out_factors")) {
    if (!j["out_factors"].is_array())
      throw ValidationError("instrument: out_factors must be an array");
    factors = FactorDims(j["out_factors"].get<std::vector<std::size_t>>());
  }
  return validate_instrument(space, ops, j["in_dim"].get<std::size_t>(),
                             j["out_dim"].get<std::size_t>(),
                             std::move(factors), tol);
}

}  // namespace qm
