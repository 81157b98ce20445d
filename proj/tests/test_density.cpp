#include <catch2/catch_amalgamated.hpp>
#include "cbi/density.hpp"
