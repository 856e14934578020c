#pragma once

#include <lstar/version.hpp>

#include <lstar/core/dense.hpp>
#include <lstar/core/format.hpp>
#include <lstar/core/norms.hpp>
#include <lstar/core/svd.hpp>

#include <lstar/measurement/operator.hpp>
#include <lstar/measurement/scenario.hpp>
#include <lstar/measurement/serialize.hpp>

#include <lstar/random/ensembles.hpp>
#include <lstar/random/rng.hpp>

#include <lstar/solvers/common.hpp>
#include <lstar/solvers/mbp.hpp>
#include <lstar/solvers/mds.hpp>
#include <lstar/solvers/mlasso.hpp>

#include <lstar/cmsv/estimate.hpp>
#include <lstar/cmsv/htau.hpp>

#include <lstar/bounds/bounds.hpp>
#include <lstar/bounds/verify.hpp>
