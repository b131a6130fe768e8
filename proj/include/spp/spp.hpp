#pragma once

// Umbrella header.

#include "spp/agents.hpp"
#include "spp/analysis.hpp"
#include "spp/bandit.hpp"
#include "spp/best_response.hpp"
#include "spp/config_io.hpp"
#include "spp/cost_model.hpp"
#include "spp/equilibrium.hpp"
#include "spp/experiment.hpp"
#include "spp/rng.hpp"
#include "spp/scoring.hpp"
#include "spp/world.hpp"
