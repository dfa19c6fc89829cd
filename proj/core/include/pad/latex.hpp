// LaTeX emission of the ten problem formulations, with three variant families:
//   canonical            the reference rendering
//   equivalent(k)        same constraint set, permuted term/constraint order,
//                        swapped inequality sides, or a sign-flipped objective
//   constraint_missing(k) deterministic subset of constraints removed
//                        (k == 0 removes all of them)
// A structural fingerprint (token multisets, orientation- and sign-normalized)
// lets callers verify that equivalent variants denote the same formulation.
#pragma once

#include <string>
#include <vector>

#include "pad/problems.hpp"

namespace pad {

enum class LatexVariant { canonical, equivalent, constraint_missing };

std::string emit_latex(ProblemId id, LatexVariant variant, int k = 0);

struct LatexFingerprint {
  // Objective: normalized sense ("max"/"min") followed by sorted body tokens.
  std::vector<std::string> objective;
  // One sorted token list per constraint; the outer list is sorted as well, so
  // constraint order is immaterial.
  std::vector<std::vector<std::string>> constraints;

  bool operator==(const LatexFingerprint&) const = default;
};

LatexFingerprint latex_fingerprint(const std::string& latex);

}  // namespace pad
