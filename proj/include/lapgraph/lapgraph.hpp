#pragma once

#include "lapgraph/analytics.hpp"
#include "lapgraph/dates.hpp"
#include "lapgraph/errors.hpp"
#include "lapgraph/graphcore.hpp"
#include "lapgraph/io.hpp"
#include "lapgraph/preprocess.hpp"
#include "lapgraph/solvers.hpp"
#include "lapgraph/synth.hpp"
#include "lapgraph/version.hpp"
