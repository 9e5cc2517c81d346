#pragma once

// Umbrella header for the whole library.

#include "ames/types.hpp"
#include "ames/sparse_matrix.hpp"
#include "ames/permutation.hpp"
#include "ames/matrix_market.hpp"
#include "ames/scaling.hpp"
#include "ames/graph.hpp"
#include "ames/partition.hpp"
#include "ames/dissection_tree.hpp"
#include "ames/ilu.hpp"
#include "ames/sparse_lu.hpp"
#include "ames/fsai.hpp"
#include "ames/ainv.hpp"
#include "ames/local_factor.hpp"
#include "ames/schur.hpp"
#include "ames/ames_preconditioner.hpp"
#include "ames/overlap.hpp"
#include "ames/gmres.hpp"
#include "ames/pipeline.hpp"
