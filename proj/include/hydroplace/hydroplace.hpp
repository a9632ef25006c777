#pragma once

#include "hydroplace/common.hpp"
#include "hydroplace/config.hpp"
#include "hydroplace/network.hpp"
#include "hydroplace/shortest_paths.hpp"
#include "hydroplace/linalg.hpp"
#include "hydroplace/hydraulics.hpp"
#include "hydroplace/sensitivity.hpp"
#include "hydroplace/objectives.hpp"
#include "hydroplace/relaxation.hpp"
#include "hydroplace/round_swap.hpp"
#include "hydroplace/problem.hpp"
#include "hydroplace/pareto.hpp"
#include "hydroplace/synthetic.hpp"
