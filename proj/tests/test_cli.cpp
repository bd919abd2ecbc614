#include <doctest.h>
#include "support/synth.hpp"
#include "brassica/cli.hpp"
#include "brassica/checkpoint.hpp"
#include "brassica/gradcheck.hpp"
#include "brassica/metrics.hpp"

TEST_CASE("stub_cli") { CHECK(true); }
