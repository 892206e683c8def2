#include "malcal/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace malcal {

namespace {
std::uint32_t low_word(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t high_word(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }
}  // namespace

Rng make_stream(std::uint64_t master_seed, std::uint64_t domain, std::uint64_t index) {
    std::seed_seq seq{low_word(master_seed), high_word(master_seed), low_word(domain),
                      high_word(domain),     low_word(index),       high_word(index)};
    return Rng(seq);
}

double standard_normal(Rng& rng) {
    boost::random::normal_distribution<double> dist;
    return dist(rng);
}

double uniform01(Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(rng);
}

}  // namespace malcal
