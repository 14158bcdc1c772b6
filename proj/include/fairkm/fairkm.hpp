#pragma once

#include "fairkm/csv.hpp"
#include "fairkm/dataset.hpp"
#include "fairkm/error.hpp"
#include "fairkm/fairadjust.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/neighbors.hpp"
#include "fairkm/pipeline.hpp"
