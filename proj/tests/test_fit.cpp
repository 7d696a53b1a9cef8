#include <catch2/catch_amalgamated.hpp>
#include "spinrb/spinrb.hpp"
