#pragma once

#include "ballab/core.hpp"
#include "ballab/quasi_random.hpp"
#include "ballab/ball_geometry.hpp"
#include "ballab/polynomial.hpp"
#include "ballab/holomap.hpp"
#include "ballab/sample_grid.hpp"
#include "ballab/dynamics.hpp"
#include "ballab/ergodicity.hpp"
#include "ballab/map_spec.hpp"
#include "ballab/report.hpp"
