#pragma once

#include <string>

#include "kmt/theory.hpp"

namespace kmt::llfp {

/// The six lock-type rules plus the CallByValue `Val` condition rule.
void registerRules(Registry& r);

std::string preludeLLFP();

}  // namespace kmt::llfp
