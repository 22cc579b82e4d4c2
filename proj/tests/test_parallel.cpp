#include "spikelab/parallel.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace spikelab;

TEST_CASE("parallel_sum is bit-identical across thread counts") {
    auto term = [](std::size_t i) { return std::sin(0.001 * static_cast<double>(i)) / (1.0 + static_cast<double>(i)); };
    set_thread_count(1);
    const double one = parallel_sum(100000, term);
    set_thread_count(4);
    const double four = parallel_sum(100000, term);
    set_thread_count(0);
    CHECK(one == four);
}

TEST_CASE("parallel_for covers every index and rethrows") {
    set_thread_count(3);
    std::vector<int> hit(1000, 0);
    parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
    for (int h : hit) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                        if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
    set_thread_count(0);
}
