#pragma once

#include "nswxos/assignment.hpp"
#include "nswxos/bundle.hpp"
#include "nswxos/capped_welfare.hpp"
#include "nswxos/exact_oracles.hpp"
#include "nswxos/generators.hpp"
#include "nswxos/hardness.hpp"
#include "nswxos/io.hpp"
#include "nswxos/matching.hpp"
#include "nswxos/moving_knife.hpp"
#include "nswxos/nsw_solver.hpp"
#include "nswxos/rng.hpp"
#include "nswxos/valuation.hpp"
