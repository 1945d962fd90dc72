#pragma once

#include "bicshg/errors.hpp"
#include "bicshg/structure.hpp"
#include "bicshg/dispersion.hpp"
#include "bicshg/roots.hpp"
#include "bicshg/siegert.hpp"
#include "bicshg/shg.hpp"
#include "bicshg/flux.hpp"
#include "bicshg/oracle.hpp"
#include "bicshg/parallel.hpp"
