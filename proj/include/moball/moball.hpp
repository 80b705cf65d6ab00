#pragma once

#include "core.hpp"
#include "io.hpp"
#include "problems.hpp"
#include "projections.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "verify.hpp"
