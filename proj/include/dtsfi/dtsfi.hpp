#pragma once

#include "dtsfi/error.hpp"
#include "dtsfi/models.hpp"
#include "dtsfi/integrator.hpp"
#include "dtsfi/handoff.hpp"
#include "dtsfi/indices.hpp"
#include "dtsfi/dataset.hpp"
#include "dtsfi/fixtures.hpp"
#include "dtsfi/lhs.hpp"
#include "dtsfi/nelder_mead.hpp"
#include "dtsfi/estimation.hpp"
#include "dtsfi/sensitivity.hpp"
#include "dtsfi/scenarios.hpp"
#include "dtsfi/json_io.hpp"
#include "dtsfi/svg.hpp"
