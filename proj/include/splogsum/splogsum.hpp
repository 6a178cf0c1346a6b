#pragma once

#include "splogsum/dataset.hpp"
#include "splogsum/errors.hpp"
#include "splogsum/logistic.hpp"
#include "splogsum/metrics.hpp"
#include "splogsum/penalties.hpp"
#include "splogsum/rng.hpp"
#include "splogsum/serialization.hpp"
#include "splogsum/sim.hpp"
#include "splogsum/solver.hpp"
#include "splogsum/spl.hpp"
