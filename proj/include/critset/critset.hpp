#pragma once

#include "critset/errors.hpp"
#include "critset/complex.hpp"
#include "critset/sparse_matrix.hpp"
#include "critset/reduction.hpp"
#include "critset/bigstep.hpp"
#include "critset/losses.hpp"
#include "critset/optimize.hpp"
#include "critset/oracle.hpp"
