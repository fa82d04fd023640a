#pragma once

// Umbrella header: the whole soft-cache-hit placement toolkit.

#include "softcache/catalog.hpp"
#include "softcache/cli.hpp"
#include "softcache/config.hpp"
#include "softcache/csv.hpp"
#include "softcache/errors.hpp"
#include "softcache/ingest.hpp"
#include "softcache/network.hpp"
#include "softcache/objective.hpp"
#include "softcache/oracle.hpp"
#include "softcache/parallel.hpp"
#include "softcache/placement.hpp"
#include "softcache/rng.hpp"
#include "softcache/simkit.hpp"
#include "softcache/solvers.hpp"
#include "softcache/types.hpp"
#include "softcache/verify.hpp"
