#include <catch2/catch_amalgamated.hpp>
#include "cbi/smoothing.hpp"
