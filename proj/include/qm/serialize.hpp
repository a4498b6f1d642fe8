#ifndef QM_SERIALIZE_HPP
#define QM_SERIALIZE_HPP

#include <json.hpp>

#include "qm/instrument.hpp"
#include "qm/observable.hpp"

namespace qm {

using json = nlohmann::json;

// Matrix literal: an array of rows; a complex entry is a two-element array
// [re, im].
json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

// {dim, axes: [[labels]], effects: {"x1|x2|...|xn": matrix literal}}.
json observable_to_json(const Observable& a);
Observable observable_from_json(const json& j, Tolerance tol = {});

// State serializes as its matrix literal.
json state_to_json(const State& s);
State state_from_json(const json& j, Tolerance tol = {});

// {space: [[labels]], in_dim, out_dim, out_factors?: [m1,...],
//  operations: {"x1|...|xn": [matrix literal, ...]}}.
json instrument_to_json(const Instrument& i);
Instrument instrument_from_json(const json& j, Tolerance tol = {});

}  // namespace qm

#endif
