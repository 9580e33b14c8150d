#pragma once

#include "stereorig/cloud.hpp"
#include "stereorig/commands.hpp"
#include "stereorig/config.hpp"
#include "stereorig/errors.hpp"
#include "stereorig/geometry.hpp"
#include "stereorig/grid.hpp"
#include "stereorig/io.hpp"
#include "stereorig/mechanics.hpp"
#include "stereorig/pgm.hpp"
#include "stereorig/pipeline.hpp"
#include "stereorig/planner.hpp"
#include "stereorig/point_cloud.hpp"
#include "stereorig/random.hpp"
#include "stereorig/scene.hpp"
#include "stereorig/vision.hpp"
