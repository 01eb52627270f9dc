// Umbrella header.

#ifndef FORGELOC_FORGELOC_HPP_
#define FORGELOC_FORGELOC_HPP_

#include "forgeloc/commands.hpp"
#include "forgeloc/core.hpp"
#include "forgeloc/geometry.hpp"
#include "forgeloc/io.hpp"
#include "forgeloc/learning.hpp"
#include "forgeloc/localization.hpp"
#include "forgeloc/metrics.hpp"
#include "forgeloc/pipeline.hpp"
#include "forgeloc/sampling.hpp"
#include "forgeloc/scoring.hpp"

#endif  // FORGELOC_FORGELOC_HPP_
