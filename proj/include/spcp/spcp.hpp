#pragma once

#include "spcp/closed_loop.hpp"
#include "spcp/errors.hpp"
#include "spcp/gating.hpp"
#include "spcp/lti.hpp"
#include "spcp/metrics.hpp"
#include "spcp/report.hpp"
#include "spcp/scenario.hpp"
#include "spcp/scenario_io.hpp"
#include "spcp/sync_controller.hpp"
#include "spcp/trace.hpp"
#include "spcp/trace_csv.hpp"
