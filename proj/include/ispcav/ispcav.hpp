#pragma once

#include "ispcav/cascade.hpp"
#include "ispcav/directing.hpp"
#include "ispcav/ensemble.hpp"
#include "ispcav/errors.hpp"
#include "ispcav/estimate.hpp"
#include "ispcav/graph.hpp"
#include "ispcav/measure.hpp"
#include "ispcav/mis.hpp"
#include "ispcav/model.hpp"
#include "ispcav/mp.hpp"
#include "ispcav/rng.hpp"
#include "ispcav/rs_cavity.hpp"
#include "ispcav/sampling.hpp"
