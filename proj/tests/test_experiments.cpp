#include <doctest.h>

TEST_SUITE("experiments") {}
