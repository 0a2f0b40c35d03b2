#pragma once

#include "srdcf/box.hpp"
#include "srdcf/config.hpp"
#include "srdcf/detection.hpp"
#include "srdcf/error.hpp"
#include "srdcf/features.hpp"
#include "srdcf/fhog.hpp"
#include "srdcf/image.hpp"
#include "srdcf/regularization.hpp"
#include "srdcf/signal.hpp"
#include "srdcf/snapshot.hpp"
#include "srdcf/solver.hpp"
#include "srdcf/tracker.hpp"
