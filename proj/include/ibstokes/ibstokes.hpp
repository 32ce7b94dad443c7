#pragma once

#include "ibstokes/analysis.hpp"
#include "ibstokes/errors.hpp"
#include "ibstokes/geometry.hpp"
#include "ibstokes/immersed_boundary.hpp"
#include "ibstokes/kernel.hpp"
#include "ibstokes/mesh.hpp"
#include "ibstokes/quadrature.hpp"
#include "ibstokes/saddle_solver.hpp"
#include "ibstokes/sparse.hpp"
#include "ibstokes/stokes.hpp"
#include "ibstokes/study.hpp"
