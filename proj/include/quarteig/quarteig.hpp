#pragma once

#include "quarteig/core.hpp"
#include "quarteig/numkit.hpp"
#include "quarteig/pencil.hpp"
#include "quarteig/solution.hpp"
#include "quarteig/scaling.hpp"
#include "quarteig/deflate.hpp"
#include "quarteig/gevp.hpp"
#include "quarteig/diagnostics.hpp"
#include "quarteig/eigvec.hpp"
#include "quarteig/solver.hpp"
#include "quarteig/probio.hpp"
#include "quarteig/cli.hpp"
