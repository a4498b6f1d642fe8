#include "qm/outcome.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace qm {

std::string join_outcome(const Outcome& o) {
  std::string s;
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (i) s += '|';
    s += o[i];
  }
  return s;
}

Outcome split_outcome(const std::string& s, std::size_t axes) {
  Outcome out;
  std::string part;
  std::istringstream is(s);
  while (std::getline(is, part, '|')) out.push_back(part);
  if (!s.empty() && s.back() == '|') out.push_back("");
  if (out.empty()) out.push_back("");
  if (out.size() != axes)
    throw ValidationError("outcome \"" + s + "\" has " +
                          std::to_string(out.size()) + " components, expected " +
                          std::to_string(axes));
  return out;
}

OutcomeSpace::OutcomeSpace(std::vector<std::vector<std::string>> axes)
    : axes_(std::move(axes)) {
  if (axes_.empty()) throw ValidationError("outcome space: no axes");
  total_ = 1;
  for (const auto& ax : axes_) {
    if (ax.empty()) throw ValidationError("outcome space: empty axis");
    std::set<std::string> seen;
    for (const auto& label : ax) {
      if (label.find('|') != std::string::npos)
        throw ValidationError("outcome label \"" + label +
                              "\" contains reserved '|'");
      if (!seen.insert(label).second)
        throw ValidationError("duplicate label \"" + label + "\" in axis");
    }
    total_ *= ax.size();
  }
}

const std::vector<std::string>& OutcomeSpace::axis(std::size_t i) const {
  if (i >= axes_.size()) throw DimensionError("axis index out of range");
  return axes_[i];
}

bool OutcomeSpace::nontrivial() const {
  return std::all_of(axes_.begin(), axes_.end(),
                     [](const auto& ax) { return ax.size() >= 2; });
}

Outcome OutcomeSpace::outcome_at(std::size_t index) const {
  if (index >= total_) throw DimensionError("outcome index out of range");
  Outcome o(axes_.size());
  for (std::size_t i = axes_.size(); i-- > 0;) {
    o[i] = axes_[i][index % axes_[i].size()];
    index /= axes_[i].size();
  }
  return o;
}

std::size_t OutcomeSpace::label_index(std::size_t axis,
                                      const std::string& label) const {
  const auto& ax = this->axis(axis);
  const auto it = std::find(ax.begin(), ax.end(), label);
  if (it == ax.end())
    throw ValidationError("unknown label \"" + label + "\" on axis " +
                          std::to_string(axis + 1));
  return static_cast<std::size_t>(it - ax.begin());
}

std::size_t OutcomeSpace::index_of(const Outcome& o) const {
  if (o.size() != axes_.size())
    throw ValidationError("outcome \"" + join_outcome(o) +
                          "\" has wrong axis count");
  std::size_t idx = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i)
    idx = idx * axes_[i].size() + label_index(i, o[i]);
  return idx;
}

bool OutcomeSpace::contains(const Outcome& o) const {
  if (o.size() != axes_.size()) return false;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const auto& ax = axes_[i];
    if (std::find(ax.begin(), ax.end(), o[i]) == ax.end()) return false;
  }
  return true;
}

std::vector<std::size_t> OutcomeSpace::slice(std::size_t axis,
                                             const std::string& label) const {
  const std::size_t want = label_index(axis, label);
  std::vector<std::size_t> out;
  const std::size_t later = [&] {
    std::size_t p = 1;
    for (std::size_t j = axis + 1; j < axes_.size(); ++j) p *= axes_[j].size();
    return p;
  }();
  for (std::size_t idx = 0; idx < total_; ++idx)
    if ((idx / later) % axes_[axis].size() == want) out.push_back(idx);
  return out;
}

std::vector<std::string> OutcomeSpace::flattened_labels() const {
  std::vector<std::string> out;
  out.reserve(total_);
  for (std::size_t i = 0; i < total_; ++i) {
    const Outcome o = outcome_at(i);
    std::string s;
    for (std::size_t k = 0; k < o.size(); ++k) {
      if (k) s += ',';
      s += o[k];
    }
    out.push_back(std::move(s));
  }
  return out;
}

OutcomeMap::OutcomeMap(OutcomeSpace source, OutcomeSpace target,
                       std::vector<std::size_t> target_index_of_source)
    : source_(std::move(source)),
      target_(std::move(target)),
      map_(std::move(target_index_of_source)) {
  if (map_.size() != source_.outcome_count())
    throw ValidationError("outcome map: not total over source outcomes");
  std::vector<bool> hit(target_.outcome_count(), false);
  for (std::size_t t : map_) {
    if (t >= target_.outcome_count())
      throw ValidationError("outcome map: target index out of range");
    hit[t] = true;
  }
  if (!std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }))
    throw ValidationError("outcome map: not surjective onto target");
}

OutcomeMap OutcomeMap::projection(const OutcomeSpace& source,
                                  std::size_t axis) {
  OutcomeSpace target = OutcomeSpace::single_axis(source.axis(axis));
  std::vector<std::size_t> m(source.outcome_count());
  for (std::size_t i = 0; i < source.outcome_count(); ++i)
    m[i] = source.label_index(axis, source.outcome_at(i)[axis]);
  return OutcomeMap(source, std::move(target), std::move(m));
}

OutcomeMap OutcomeMap::constant(const OutcomeSpace& source,
                                std::string target_label) {
  OutcomeSpace target = OutcomeSpace::single_axis({std::move(target_label)});
  std::vector<std::size_t> m(source.outcome_count(), 0);
  return OutcomeMap(source, std::move(target), std::move(m));
}

OutcomeMap OutcomeMap::identity(const OutcomeSpace& space) {
  std::vector<std::size_t> m(space.outcome_count());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = i;
  return OutcomeMap(space, space, std::move(m));
}

std::vector<std::size_t> OutcomeMap::fiber(std::size_t target_index) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < map_.size(); ++i)
    if (map_[i] == target_index) out.push_back(i);
  return out;
}

}  // namespace qm
