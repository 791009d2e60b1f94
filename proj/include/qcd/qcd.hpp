#pragma once

// Pathwise coordinate descent for penalized quantile regression:
// exact coordinatewise minimization of the check loss by derivative
// tracking over sorted breakpoints, with L1/SCAD/MCP penalties, a KKT
// zero-screen, warm starts and random nudges along the lambda grid, and
// the approximate weighted-median (QICD) baseline.

#include "qcd/bench.hpp"
#include "qcd/coord_min.hpp"
#include "qcd/core.hpp"
#include "qcd/io.hpp"
#include "qcd/metrics.hpp"
#include "qcd/normal.hpp"
#include "qcd/oracle.hpp"
#include "qcd/path.hpp"
#include "qcd/qicd.hpp"
#include "qcd/rng.hpp"
#include "qcd/sim.hpp"
