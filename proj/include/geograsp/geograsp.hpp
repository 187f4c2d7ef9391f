#pragma once

#include "geograsp/cli.hpp"
#include "geograsp/cloud.hpp"
#include "geograsp/cloud_io.hpp"
#include "geograsp/errors.hpp"
#include "geograsp/eval.hpp"
#include "geograsp/grasp.hpp"
#include "geograsp/json_io.hpp"
#include "geograsp/object_model.hpp"
#include "geograsp/pipeline.hpp"
#include "geograsp/plane_seg.hpp"
#include "geograsp/rng.hpp"
#include "geograsp/shapes.hpp"
#include "geograsp/synthscene.hpp"
