#include <gtest/gtest.h>

#include "intentsketch/backends.hpp"

int main(int argc, char** argv) {
    // Nothing in the unit suite may reach a real endpoint.
    intentsketch::backends::forbid_network(true);
    ::testing::InitGoogleTest(&argc, argv);
    return RUN_ALL_TESTS();
}
