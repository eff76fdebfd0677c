#pragma once

#include "gtaxo/errors.hpp"
#include "gtaxo/rng.hpp"
#include "gtaxo/graph.hpp"
#include "gtaxo/dataset_io.hpp"
#include "gtaxo/graph_stats.hpp"
#include "gtaxo/spectral.hpp"
#include "gtaxo/perturb.hpp"
#include "gtaxo/splits.hpp"
#include "gtaxo/synthgen.hpp"
#include "gtaxo/metrics.hpp"
#include "gtaxo/mpnn.hpp"
#include "gtaxo/train.hpp"
#include "gtaxo/sensitivity.hpp"
#include "gtaxo/profiler.hpp"
#include "gtaxo/taxonomy.hpp"
#include "gtaxo/manifest.hpp"
#include "gtaxo/version.hpp"
