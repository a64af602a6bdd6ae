#pragma once

#include "antimu/api.hpp"
#include "antimu/clonalg.hpp"
#include "antimu/config.hpp"
#include "antimu/error.hpp"
#include "antimu/evaluation.hpp"
#include "antimu/features.hpp"
#include "antimu/gngu.hpp"
#include "antimu/io.hpp"
#include "antimu/pipeline.hpp"
#include "antimu/random.hpp"
#include "antimu/raster.hpp"
#include "antimu/rbf.hpp"
#include "antimu/sweep.hpp"
#include "antimu/synth.hpp"
