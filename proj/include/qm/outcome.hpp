#ifndef QM_OUTCOME_HPP
#define QM_OUTCOME_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "qm/error.hpp"

namespace qm {

// An outcome picks one label per axis. Plain (1-axis) observables use
// single-element tuples.
using Outcome = std::vector<std::string>;

std::string join_outcome(const Outcome& o);          // "x1|x2|...|xn"
Outcome split_outcome(const std::string& s, std::size_t axes);

// Ordered product of label axes. Canonical outcome enumeration is
// lexicographic with the leftmost axis most significant, matching the
// Kronecker index convention.
class OutcomeSpace {
 public:
  OutcomeSpace() = default;
  explicit OutcomeSpace(std::vector<std::vector<std::string>> axes);

  static OutcomeSpace single_axis(std::vector<std::string> labels) {
    return OutcomeSpace({std::move(labels)});
  }

  std::size_t axis_count() const { return axes_.size(); }
  std::size_t outcome_count() const { return total_; }
  const std::vector<std::string>& axis(std::size_t i) const;
  const std::vector<std::vector<std::string>>& axes() const { return axes_; }

  // True when every axis has at least two labels ("nontrivial" product
  // structure); 1-axis spaces report false unless the axis itself has >= 2.
  bool nontrivial() const;

  Outcome outcome_at(std::size_t index) const;
  std::size_t index_of(const Outcome& o) const;  // throws on unknown labels
  bool contains(const Outcome& o) const;

  // Index of label within axis i.
  std::size_t label_index(std::size_t axis, const std::string& label) const;

  // All canonical indices whose axis-i component equals the given label.
  std::vector<std::size_t> slice(std::size_t axis,
                                 const std::string& label) const;

  // The whole space collapsed to one axis; labels are full outcome tuples
  // joined with ',' (used when a multi-axis object enters a product as one
  // factor).
  std::vector<std::string> flattened_labels() const;

  friend bool operator==(const OutcomeSpace& a, const OutcomeSpace& b) {
    return a.axes_ == b.axes_;
  }

 private:
  std::vector<std::vector<std::string>> axes_;
  std::size_t total_ = 0;
};

// Total map from source outcomes onto target outcomes; surjectivity is
// checked at construction (parts of observables/instruments require it).
class OutcomeMap {
 public:
  OutcomeMap(OutcomeSpace source, OutcomeSpace target,
             std::vector<std::size_t> target_index_of_source);

  // Coordinate projection onto axis i.
  static OutcomeMap projection(const OutcomeSpace& source, std::size_t axis);

  // Everything to one target outcome (the trivial part).
  static OutcomeMap constant(const OutcomeSpace& source,
                             std::string target_label = "*");

  static OutcomeMap identity(const OutcomeSpace& space);

  const OutcomeSpace& source() const { return source_; }
  const OutcomeSpace& target() const { return target_; }

  std::size_t apply_index(std::size_t source_index) const {
    return map_[source_index];
  }
  Outcome apply(const Outcome& o) const {
    return target_.outcome_at(map_[source_.index_of(o)]);
  }

  // Source indices in canonical order with f(x) = target index y.
  std::vector<std::size_t> fiber(std::size_t target_index) const;

 private:
  OutcomeSpace source_;
  OutcomeSpace target_;
  std::vector<std::size_t> map_;
};

}  // namespace qm

#endif
