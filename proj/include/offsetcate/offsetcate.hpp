#pragma once

// Umbrella header for the offsetcate library.

#include "offsetcate/math.hpp"
#include "offsetcate/dgm.hpp"
#include "offsetcate/likelihood.hpp"
#include "offsetcate/causal.hpp"
#include "offsetcate/newton.hpp"
#include "offsetcate/estimators.hpp"
#include "offsetcate/metrics.hpp"
#include "offsetcate/experiments.hpp"
#include "offsetcate/svg.hpp"
