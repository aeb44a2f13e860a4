#pragma once

#include "block_partition.hpp"
#include "cluster_tree.hpp"
#include "experiment.hpp"
#include "geometry.hpp"
#include "h2_matrix.hpp"
#include "halton.hpp"
#include "index_set.hpp"
#include "interpolation.hpp"
#include "io.hpp"
#include "kernel.hpp"
#include "legendre.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "types.hpp"
#include "weights.hpp"
