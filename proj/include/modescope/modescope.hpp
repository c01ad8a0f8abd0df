#pragma once

#include "modescope/companion.hpp"
#include "modescope/diagnostics.hpp"
#include "modescope/dmd.hpp"
#include "modescope/experiment.hpp"
#include "modescope/io.hpp"
#include "modescope/linalg.hpp"
#include "modescope/rng.hpp"
#include "modescope/selection.hpp"
#include "modescope/signal.hpp"
#include "modescope/svg.hpp"
#include "modescope/types.hpp"
