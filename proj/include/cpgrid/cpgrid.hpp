#pragma once

#include "cpgrid/calibrate.hpp"
#include "cpgrid/calibration_set.hpp"
#include "cpgrid/container.hpp"
#include "cpgrid/error.hpp"
#include "cpgrid/evaluate.hpp"
#include "cpgrid/field_tensor.hpp"
#include "cpgrid/grid_spec.hpp"
#include "cpgrid/intervals.hpp"
#include "cpgrid/manifest.hpp"
#include "cpgrid/normal.hpp"
#include "cpgrid/parallel.hpp"
#include "cpgrid/rng.hpp"
#include "cpgrid/scores.hpp"
#include "cpgrid/svg.hpp"
#include "cpgrid/synth.hpp"
