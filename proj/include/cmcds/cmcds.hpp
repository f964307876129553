#pragma once

// Umbrella header for the CMCDS pricing toolkit.

#include "cmcds/cholesky.hpp"
#include "cmcds/csv.hpp"
#include "cmcds/curves.hpp"
#include "cmcds/errors.hpp"
#include "cmcds/hazard.hpp"
#include "cmcds/market_data.hpp"
#include "cmcds/matrix.hpp"
#include "cmcds/mc_dual.hpp"
#include "cmcds/mc_single.hpp"
#include "cmcds/model_params.hpp"
#include "cmcds/pricer.hpp"
#include "cmcds/rates.hpp"
#include "cmcds/rng.hpp"
#include "cmcds/sim_config.hpp"
#include "cmcds/tenor_grid.hpp"
