#pragma once

#include "bvb/util.hpp"
#include "bvb/tensor_core.hpp"
#include "bvb/operator.hpp"
#include "bvb/linearize.hpp"
#include "bvb/ellipticity.hpp"
#include "bvb/field.hpp"
#include "bvb/jump.hpp"
#include "bvb/potential.hpp"
#include "bvb/projection.hpp"
