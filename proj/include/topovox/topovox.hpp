// Everything at once.

#pragma once

#include "topovox/grid.hpp"
#include "topovox/gf2.hpp"
#include "topovox/homology.hpp"
#include "topovox/labels.hpp"
#include "topovox/noise.hpp"
#include "topovox/morphology.hpp"
#include "topovox/seeds.hpp"
#include "topovox/deform.hpp"
#include "topovox/io.hpp"
#include "topovox/pipeline.hpp"
