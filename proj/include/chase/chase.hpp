#pragma once

#include "chase/api.hpp"
#include "chase/bandits.hpp"
#include "chase/bayes_player.hpp"
#include "chase/belief_pomdp.hpp"
#include "chase/bundle.hpp"
#include "chase/context.hpp"
#include "chase/data_ingest.hpp"
#include "chase/document.hpp"
#include "chase/dp_solver.hpp"
#include "chase/match_model.hpp"
#include "chase/mdp.hpp"
#include "chase/model_free.hpp"
#include "chase/naive_bayes.hpp"
#include "chase/rng.hpp"
#include "chase/simulator.hpp"
#include "chase/transfer.hpp"
