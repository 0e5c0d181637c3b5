#pragma once

#include <string>

#include "kmt/theory.hpp"

namespace kmt::wtypes {

/// W-type formation/introduction/elimination/computation, finite enums
/// with dependent match, and the `induct`/`def` structural features.
void registerRules(Registry& r);

std::string preludeLFW();

}  // namespace kmt::wtypes
