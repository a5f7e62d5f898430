// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rgbd_size/bundle.hpp"
#include "rgbd_size/camera.hpp"
#include "rgbd_size/densify.hpp"
#include "rgbd_size/error.hpp"
#include "rgbd_size/image.hpp"
#include "rgbd_size/measure.hpp"
#include "rgbd_size/overlay.hpp"
#include "rgbd_size/pipeline.hpp"
#include "rgbd_size/segment.hpp"
#include "rgbd_size/spatial.hpp"
#include "rgbd_size/synth.hpp"
