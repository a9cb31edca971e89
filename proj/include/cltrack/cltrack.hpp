#pragma once

#include "cltrack/association.hpp"
#include "cltrack/config.hpp"
#include "cltrack/errors.hpp"
#include "cltrack/filter.hpp"
#include "cltrack/geometry.hpp"
#include "cltrack/hungarian.hpp"
#include "cltrack/ingest.hpp"
#include "cltrack/kitti.hpp"
#include "cltrack/memory.hpp"
#include "cltrack/metrics.hpp"
#include "cltrack/pipeline.hpp"
#include "cltrack/plot.hpp"
#include "cltrack/simulator.hpp"
