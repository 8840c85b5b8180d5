#pragma once

#include "hdgkp/analysis.hpp"
#include "hdgkp/basis.hpp"
#include "hdgkp/forms.hpp"
#include "hdgkp/global_solver.hpp"
#include "hdgkp/mesh.hpp"
#include "hdgkp/projection.hpp"
#include "hdgkp/quadrature.hpp"
#include "hdgkp/run_config.hpp"
#include "hdgkp/scenarios.hpp"
#include "hdgkp/stabilization.hpp"
#include "hdgkp/timestep.hpp"
#include "hdgkp/trace_set.hpp"
