#pragma once

#include <vector>

#include "qoja/common.hpp"

namespace qoja {

struct Proposal {
  Vec2 position = Vec2::Zero();  // pixels
  double confidence = 1.0;       // in (0, 1]

  bool operator==(const Proposal&) const = default;
};

/// Candidate 2D locations for every joint of one frame. An empty list forces
/// the null choice for that joint.
struct ProposalSet {
  std::vector<std::vector<Proposal>> joints;

  int joint_count() const { return static_cast<int>(joints.size()); }
  int count(int j) const { return static_cast<int>(joints[j].size()); }

  /// Index of the highest-confidence proposal (first on ties), -1 if none.
  int best(int j) const {
    int best = -1;
    for (int p = 0; p < count(j); ++p)
      if (best < 0 || joints[j][p].confidence > joints[j][best].confidence) best = p;
    return best;
  }

  bool operator==(const ProposalSet&) const = default;
};

}  // namespace qoja
