#pragma once

// Umbrella header.

#include "kcontact/chart_calculus.hpp"
#include "kcontact/kcontact_system.hpp"
#include "kcontact/models.hpp"
#include "kcontact/pde_solver.hpp"
#include "kcontact/sampling.hpp"
#include "kcontact/section_grid.hpp"
#include "kcontact/symmetry.hpp"
