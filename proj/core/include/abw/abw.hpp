#pragma once

#include "abw/abw_metric.hpp"
#include "abw/block_linalg.hpp"
#include "abw/errors.hpp"
#include "abw/geometry.hpp"
#include "abw/oracle.hpp"
