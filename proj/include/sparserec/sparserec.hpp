#pragma once

#include "analysis.hpp"
#include "core.hpp"
#include "ensembles.hpp"
#include "harness/config.hpp"
#include "harness/csv.hpp"
#include "harness/experiment.hpp"
#include "harness/signal.hpp"
#include "io.hpp"
#include "pdhg.hpp"
#include "prox.hpp"
#include "quantize.hpp"
#include "rng.hpp"
#include "solvers.hpp"
