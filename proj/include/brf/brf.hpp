#pragma once

// Balanced random forests for imbalanced two-class data.

#include "brf/arff.hpp"
#include "brf/csv.hpp"
#include "brf/dataset.hpp"
#include "brf/error.hpp"
#include "brf/eval.hpp"
#include "brf/forest.hpp"
#include "brf/model_io.hpp"
#include "brf/parallel.hpp"
#include "brf/random.hpp"
#include "brf/sampling.hpp"
#include "brf/tree.hpp"
