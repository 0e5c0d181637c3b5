#pragma once

#include <string>
#include <vector>

#include "kmt/expr.hpp"
#include "kmt/theory.hpp"

namespace kmt {
class Solver;
}

namespace kmt::linear {

/// Flatten a world expression into its multiset of atoms (unions removed,
/// units dropped). Atoms are arbitrary non-union subterms.
std::vector<ExprPtr> worldAtoms(Solver& s, const ExprPtr& w);

/// Canonical right-nested rebuild: innermost-bound variables first, ties
/// by name; empty multiset is the empty world.
ExprPtr rebuildWorld(Solver& s, const Context& ctx, std::vector<ExprPtr> atoms);

/// NormalizeWorlds, EquateWorlds, and the optional IdempotentWorlds
/// contraction variant (off unless its rule is declared).
void registerRules(Registry& r);

}  // namespace kmt::linear
