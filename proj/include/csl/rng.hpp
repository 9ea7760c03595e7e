#pragma once

// xoshiro256++ (Blackman & Vigna, 2019): 256-bit state, period 2^256 - 1,
// passes BigCrush and PractRand. jump() advances by 2^128 and long_jump() by
// 2^192 draws, which gives disjoint substreams for parallel sample blocks.

#include <array>
#include <cstdint>
#include <limits>

namespace csl {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    void jump() {
        static constexpr std::array<std::uint64_t, 4> kJump{
            0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL, 0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
        apply(kJump);
    }

    void long_jump() {
        static constexpr std::array<std::uint64_t, 4> kLongJump{
            0x76e15d3efefdcbbfULL, 0xc5004e441c522fb3ULL, 0x77710069854ee241ULL, 0x39109bb02acbe635ULL};
        apply(kLongJump);
    }

    friend bool operator==(const Xoshiro256pp&, const Xoshiro256pp&) = default;

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    void apply(const std::array<std::uint64_t, 4>& poly) {
        std::array<std::uint64_t, 4> acc{};
        for (std::uint64_t word : poly) {
            for (int b = 0; b < 64; ++b) {
                if (word & (std::uint64_t{1} << b)) {
                    for (int i = 0; i < 4; ++i) acc[i] ^= s_[i];
                }
                (*this)();
            }
        }
        s_ = acc;
    }

    std::array<std::uint64_t, 4> s_{};
};

}  // namespace csl
