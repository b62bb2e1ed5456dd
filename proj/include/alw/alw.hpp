#pragma once

// Umbrella header.

#include "alw/adaptive_window.hpp"
#include "alw/energy.hpp"
#include "alw/error.hpp"
#include "alw/image.hpp"
#include "alw/image_io.hpp"
#include "alw/levelset.hpp"
#include "alw/parallel.hpp"
#include "alw/phantom.hpp"
#include "alw/report.hpp"
#include "alw/segmenter.hpp"
#include "alw/suites.hpp"
#include "alw/texture.hpp"
