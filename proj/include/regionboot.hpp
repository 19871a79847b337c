#pragma once

#include "regionboot/errors.hpp"
#include "regionboot/numeric.hpp"
#include "regionboot/rng.hpp"
#include "regionboot/surface_jets.hpp"
#include "regionboot/regions.hpp"
#include "regionboot/bp_engine.hpp"
#include "regionboot/multiscale.hpp"
#include "regionboot/oracle.hpp"
#include "regionboot/classic_tests.hpp"
#include "regionboot/methods.hpp"
#include "regionboot/rejection_lab.hpp"
#include "regionboot/io.hpp"
