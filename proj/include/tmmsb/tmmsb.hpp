#pragma once

// Transactional mixed-membership blockmodel: generative simulation,
// variational EM inference, BIC model selection, clustering and
// link-prediction metrics, log reductions, and a hierarchical baseline.

#include "tmmsb/baseline.hpp"
#include "tmmsb/bench.hpp"
#include "tmmsb/data_io.hpp"
#include "tmmsb/inference.hpp"
#include "tmmsb/math.hpp"
#include "tmmsb/matrix.hpp"
#include "tmmsb/metrics.hpp"
#include "tmmsb/presets.hpp"
#include "tmmsb/rng.hpp"
#include "tmmsb/selection.hpp"
#include "tmmsb/serialize.hpp"
#include "tmmsb/simulate.hpp"
#include "tmmsb/spectral.hpp"
#include "tmmsb/types.hpp"
