#pragma once

#include "qnopt/core.hpp"
#include "qnopt/problems.hpp"
#include "qnopt/linesearch.hpp"
#include "qnopt/updates.hpp"
#include "qnopt/solvers.hpp"
#include "qnopt/experiments.hpp"
#include "qnopt/bench.hpp"
