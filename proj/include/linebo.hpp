#pragma once

#include "linebo/kernel.hpp"
#include "linebo/gaussian_process.hpp"
#include "linebo/line_geometry.hpp"
#include "linebo/bo1d.hpp"
#include "linebo/safeopt1d.hpp"
#include "linebo/linebo.hpp"
#include "linebo/benchmarks.hpp"
#include "linebo/trace.hpp"
#include "linebo/config.hpp"
#include "linebo/experiment.hpp"
