#pragma once

#include "grace/core.hpp"
#include "grace/cv.hpp"
#include "grace/data.hpp"
#include "grace/diagnostics.hpp"
#include "grace/estimator.hpp"
#include "grace/graph.hpp"
#include "grace/inference.hpp"
#include "grace/io.hpp"
#include "grace/lasso.hpp"
#include "grace/normal.hpp"
#include "grace/parallel.hpp"
#include "grace/pipeline.hpp"
#include "grace/power.hpp"
#include "grace/random.hpp"
#include "grace/simulation.hpp"
