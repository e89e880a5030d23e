#pragma once

#include "mcid/csv.hpp"
#include "mcid/data.hpp"
#include "mcid/error.hpp"
#include "mcid/format.hpp"
#include "mcid/inner_solver.hpp"
#include "mcid/kernels.hpp"
#include "mcid/losses.hpp"
#include "mcid/model_selection.hpp"
#include "mcid/numerics.hpp"
#include "mcid/parallel.hpp"
#include "mcid/personalized.hpp"
#include "mcid/population.hpp"
#include "mcid/rng.hpp"
#include "mcid/simulation.hpp"
