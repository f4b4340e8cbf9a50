#pragma once

#include "pfobs/barriers.hpp"
#include "pfobs/config.hpp"
#include "pfobs/diagnostics.hpp"
#include "pfobs/errors.hpp"
#include "pfobs/geometry.hpp"
#include "pfobs/grid.hpp"
#include "pfobs/harness.hpp"
#include "pfobs/initial_data.hpp"
#include "pfobs/io.hpp"
#include "pfobs/phase_state.hpp"
#include "pfobs/potential.hpp"
#include "pfobs/report.hpp"
#include "pfobs/solver.hpp"
#include "pfobs/verify.hpp"
#include "pfobs/xreal.hpp"
