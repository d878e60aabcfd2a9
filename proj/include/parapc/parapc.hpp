#pragma once

#include "parapc/citest.hpp"
#include "parapc/data.hpp"
#include "parapc/graph.hpp"
#include "parapc/ida.hpp"
#include "parapc/orient.hpp"
#include "parapc/skeleton.hpp"
#include "parapc/synth.hpp"
#include "parapc/worker_pool.hpp"
