#pragma once

#include "enn/bounds.hpp"
#include "enn/experiments.hpp"
#include "enn/io.hpp"
#include "enn/matrix.hpp"
#include "enn/network.hpp"
#include "enn/oracle.hpp"
#include "enn/parallel.hpp"
#include "enn/quadrature.hpp"
#include "enn/rng.hpp"
#include "enn/sieve.hpp"
#include "enn/stats.hpp"
#include "enn/targets.hpp"
#include "enn/train.hpp"
#include "enn/types.hpp"
