#pragma once

// Agent-based voting simulator with coordinated-inauthenticity detection:
// simulate vote data, cluster agents from their vote correlations, label
// clusters by penalized regression against ground-truth quality, and score
// juries by majority correctness.

#include "jurysim/clustering.hpp"
#include "jurysim/engine.hpp"
#include "jurysim/gmm.hpp"
#include "jurysim/io.hpp"
#include "jurysim/kmeans.hpp"
#include "jurysim/labeling.hpp"
#include "jurysim/lasso.hpp"
#include "jurysim/metrics.hpp"
#include "jurysim/model.hpp"
#include "jurysim/numerics.hpp"
#include "jurysim/pipeline.hpp"
#include "jurysim/random.hpp"
#include "jurysim/reproduce.hpp"
