#pragma once

// Umbrella header for the lyap library.

#define LYAP_VERSION "0.1.0"

#include "lyap/almost_commuting.hpp"
#include "lyap/avalanche.hpp"
#include "lyap/bound.hpp"
#include "lyap/dynamics.hpp"
#include "lyap/errors.hpp"
#include "lyap/estimator.hpp"
#include "lyap/families.hpp"
#include "lyap/gt_bounds.hpp"
#include "lyap/matan.hpp"
#include "lyap/matrix.hpp"
#include "lyap/parallel.hpp"
#include "lyap/rng.hpp"
#include "lyap/schrodinger.hpp"
#include "lyap/stability.hpp"
#include "lyap/transfer.hpp"
