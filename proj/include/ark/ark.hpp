#pragma once

#include "ark/core/errors.hpp"
#include "ark/linalg/matrix.hpp"
#include "ark/linalg/sylvester.hpp"
#include "ark/linalg/tridiagonal.hpp"
#include "ark/lowrank/factors.hpp"
#include "ark/krylov/adaptive.hpp"
#include "ark/krylov/basis.hpp"
#include "ark/krylov/galerkin.hpp"
#include "ark/dirk/butcher.hpp"
#include "ark/dirk/stepper.hpp"
#include "ark/fullrank/dense_dirk.hpp"
#include "ark/heat/heat.hpp"
#include "ark/lbfp/grid.hpp"
#include "ark/lbfp/collision.hpp"
#include "ark/lbfp/chang_cooper.hpp"
#include "ark/lbfp/lomac.hpp"
#include "ark/lbfp/system.hpp"
