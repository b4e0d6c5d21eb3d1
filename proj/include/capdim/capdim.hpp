#pragma once

#include "capdim/boxcount.hpp"
#include "capdim/capacity.hpp"
#include "capdim/errors.hpp"
#include "capdim/experiments.hpp"
#include "capdim/grassmann.hpp"
#include "capdim/kernels.hpp"
#include "capdim/pointset.hpp"
#include "capdim/profiles.hpp"
#include "capdim/psi.hpp"
#include "capdim/quadrature.hpp"
#include "capdim/rng.hpp"
#include "capdim/serialize.hpp"
