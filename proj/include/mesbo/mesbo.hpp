#pragma once

#include "errors.hpp"
#include "random.hpp"
#include "normal.hpp"
#include "gp.hpp"
#include "hyperparameters.hpp"
#include "gumbel.hpp"
#include "features.hpp"
#include "acquisition.hpp"
#include "optimizer.hpp"
#include "bo_loop.hpp"
#include "objectives.hpp"
#include "experiment.hpp"
#include "trace_io.hpp"
#include "config.hpp"
