#pragma once

#include "sgmon/asg_dsl.hpp"
#include "sgmon/bench.hpp"
#include "sgmon/builtin.hpp"
#include "sgmon/dot.hpp"
#include "sgmon/error.hpp"
#include "sgmon/expr.hpp"
#include "sgmon/matcher.hpp"
#include "sgmon/monitor.hpp"
#include "sgmon/object_model.hpp"
#include "sgmon/predicate.hpp"
#include "sgmon/scenario.hpp"
#include "sgmon/scene_graph.hpp"
#include "sgmon/typecheck.hpp"
#include "sgmon/value.hpp"
