#pragma once

// Umbrella header.

#include "dtk/analysis.hpp"
#include "dtk/convolution.hpp"
#include "dtk/distributed_tree.hpp"
#include "dtk/embedding.hpp"
#include "dtk/io.hpp"
#include "dtk/random.hpp"
#include "dtk/synthetic.hpp"
#include "dtk/tree.hpp"
#include "dtk/tree_kernel.hpp"
#include "dtk/vector.hpp"
