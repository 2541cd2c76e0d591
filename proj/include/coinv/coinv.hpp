#pragma once

#include "coinv/error.hpp"
#include "coinv/ingest.hpp"
#include "coinv/union_find.hpp"
#include "coinv/graph.hpp"
#include "coinv/graph_io.hpp"
#include "coinv/partition.hpp"
#include "coinv/detect/detect.hpp"
#include "coinv/citation.hpp"
#include "coinv/stats/histogram.hpp"
#include "coinv/stats/summary.hpp"
#include "coinv/stats/lognormal.hpp"
#include "coinv/stats/welch.hpp"
#include "coinv/synth.hpp"
#include "coinv/pipeline.hpp"
