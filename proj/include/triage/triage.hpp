#pragma once

// Umbrella header for the triage engine.

#include "triage/analysis.hpp"
#include "triage/config.hpp"
#include "triage/costmodel.hpp"
#include "triage/deferral.hpp"
#include "triage/errors.hpp"
#include "triage/fixture_server.hpp"
#include "triage/graph.hpp"
#include "triage/json.hpp"
#include "triage/labels.hpp"
#include "triage/metrics.hpp"
#include "triage/oracle.hpp"
#include "triage/pipeline.hpp"
#include "triage/probability.hpp"
#include "triage/records.hpp"
#include "triage/rng.hpp"
#include "triage/scorers.hpp"
