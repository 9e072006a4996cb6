#pragma once

#include <string>

#include "palign/alignment.hpp"

namespace palign {

// Row-per-pattern plain-text layout with '|' tie lines between matched
// symbols, one numbered line per row plus the connector lines between them.
std::string render_alignment(const Alignment& al);

} // namespace palign
