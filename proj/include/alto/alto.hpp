#pragma once

#include "alto/error.hpp"
#include "alto/types.hpp"
#include "alto/config.hpp"
#include "alto/signal_pipeline.hpp"
#include "alto/pcm.hpp"
#include "alto/geometry.hpp"
#include "alto/calibration.hpp"
#include "alto/surface_sim.hpp"
#include "alto/csv.hpp"
#include "alto/harness.hpp"
