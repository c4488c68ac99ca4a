#pragma once

// Umbrella header for the engine (everything except the HTTP service).

#include "mapper/analysis.hpp"
#include "mapper/clustering.hpp"
#include "mapper/cover.hpp"
#include "mapper/dataset.hpp"
#include "mapper/dbscan.hpp"
#include "mapper/distance.hpp"
#include "mapper/error.hpp"
#include "mapper/filters.hpp"
#include "mapper/graph_json.hpp"
#include "mapper/graph_query.hpp"
#include "mapper/nerve.hpp"
#include "mapper/pipeline.hpp"
#include "mapper/stats.hpp"
#include "mapper/version.hpp"
