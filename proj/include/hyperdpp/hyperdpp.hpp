#pragma once

#include "hyperdpp/bounds.hpp"
#include "hyperdpp/dpp.hpp"
#include "hyperdpp/errors.hpp"
#include "hyperdpp/growth.hpp"
#include "hyperdpp/hyperbolicity.hpp"
#include "hyperdpp/kernels.hpp"
#include "hyperdpp/numeric_policy.hpp"
#include "hyperdpp/operator.hpp"
#include "hyperdpp/parallel.hpp"
#include "hyperdpp/projection.hpp"
#include "hyperdpp/quadrature.hpp"
#include "hyperdpp/report.hpp"
#include "hyperdpp/sampler.hpp"
#include "hyperdpp/space.hpp"
#include "hyperdpp/tree_projection.hpp"
