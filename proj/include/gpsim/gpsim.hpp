#pragma once

#include "gpsim/coefficients.hpp"   // IWYU pragma: export
#include "gpsim/config.hpp"         // IWYU pragma: export
#include "gpsim/continuity.hpp"     // IWYU pragma: export
#include "gpsim/csv.hpp"            // IWYU pragma: export
#include "gpsim/cutnorm.hpp"        // IWYU pragma: export
#include "gpsim/distributions.hpp"  // IWYU pragma: export
#include "gpsim/errors.hpp"         // IWYU pragma: export
#include "gpsim/experiments.hpp"    // IWYU pragma: export
#include "gpsim/fokker_planck.hpp"  // IWYU pragma: export
#include "gpsim/intervals.hpp"      // IWYU pragma: export
#include "gpsim/kernel.hpp"         // IWYU pragma: export
#include "gpsim/quadrature.hpp"     // IWYU pragma: export
#include "gpsim/registry.hpp"       // IWYU pragma: export
#include "gpsim/rng.hpp"            // IWYU pragma: export
#include "gpsim/simulate.hpp"       // IWYU pragma: export
#include "gpsim/wasserstein.hpp"    // IWYU pragma: export
