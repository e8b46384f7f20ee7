#pragma once

#include "rdr/errors.hpp"
#include "rdr/linalg.hpp"
#include "rdr/rng.hpp"
#include "rdr/sampling.hpp"
#include "rdr/problems.hpp"
#include "rdr/matrix_market.hpp"
#include "rdr/solvers.hpp"
#include "rdr/theory.hpp"
#include "rdr/bench.hpp"
#include "rdr/plot.hpp"
#include "rdr/validation.hpp"
