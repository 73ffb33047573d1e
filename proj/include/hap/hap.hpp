#pragma once

#include "hap/annotated.hpp"
#include "hap/balanced.hpp"
#include "hap/concepts.hpp"
#include "hap/distance.hpp"
#include "hap/explicable.hpp"
#include "hap/fixtures.hpp"
#include "hap/gamma.hpp"
#include "hap/io.hpp"
#include "hap/labeling.hpp"
#include "hap/model.hpp"
#include "hap/observer.hpp"
#include "hap/ops.hpp"
#include "hap/planner.hpp"
#include "hap/reconcile.hpp"
#include "hap/scores.hpp"
