#pragma once

#include <string>

#include "dfmforge/core/schema.hpp"

namespace dfmforge::core {

/// Graphviz rendering in DFM notation: fact as a record box listing the
/// measures, attributes as circles, descriptive attributes as plain labels,
/// optional ones dashed, roles as edge labels.
std::string to_dot(const DfmSchema& schema);

/// Indented tree from the fact; nodes reached again through a second parent
/// are printed once more with a trailing "^" and not expanded.
std::string to_tree_text(const DfmSchema& schema);

}  // namespace dfmforge::core
