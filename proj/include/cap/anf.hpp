#pragma once

#include "cap/elab.hpp"

namespace cap::anf {

/// True when `e` evaluates a Σ site itself (nested lambdas, blocks and branches excluded).
bool containsSite(const elab::EPtr& e);
/// True when a Σ site remains anywhere below `e`.
bool anySite(const elab::EPtr& e);

/// Unpacks every Σ site into `$sigma_i` / `$sigma_i_imp` bindings in front of the statement that
/// evaluates it. Siblings evaluated before the site are pre-bound to `$t_j`, so evaluation order is
/// unchanged. Idempotent.
elab::EPtr transform(const elab::EPtr& body);
elab::ElabProgram transformProgram(const elab::ElabProgram& prog);

}  // namespace cap::anf
