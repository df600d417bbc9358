/*
 * Umbrella header for the SDAE local-linearization solver library.
 */

#pragma once

#include "sdae/assumptions.hpp"
#include "sdae/brownian.hpp"
#include "sdae/convergence.hpp"
#include "sdae/errors.hpp"
#include "sdae/io.hpp"
#include "sdae/problem.hpp"
#include "sdae/problems.hpp"
#include "sdae/projectors.hpp"
#include "sdae/stepper.hpp"
#include "sdae/types.hpp"
