#pragma once

#include <optional>
#include <set>

#include "sbnn/params.hpp"

namespace sbnn {

// Known truth for a benchmark. Variable indices are 1-based (variable i is
// CSV column x<i>). true_connections is present only when the generating
// network itself is known (structure-selection benchmark).
struct SelectionTruth {
  std::set<int> true_variables;
  std::optional<Mask> true_connections;
  std::optional<Arch> true_arch;
};

}  // namespace sbnn
