#!/usr/bin/env python3
"""Independent recomputation of the counter-based generator in sgdf/rng.hpp.

The generator: output n of stream (seed, stream_id) is

    mix(key + n * GAMMA),   key = mix(seed ^ mix(stream_id ^ SALT))

with mix = the SplitMix64 finalizer. This script reimplements it in pure
Python and prints reference values frozen into tests/rng_test.cpp.
"""
import math

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
SALT = 0x5851F42D4C957F2D


def mix(z):
    z &= MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK
    z ^= z >> 31
    return z


def key(seed, stream_id):
    return mix((seed ^ mix(stream_id ^ SALT)) & MASK)


def output(seed, stream_id, n):  # n is the 1-based draw index
    return mix((key(seed, stream_id) + n * GAMMA) & MASK)


def uniform01(u):
    return (u >> 11) * 2.0 ** -53


def normal(u_a, u_b):
    u1 = ((u_a >> 11) + 1) * 2.0 ** -53  # (0, 1]
    u2 = (u_b >> 11) * 2.0 ** -53        # [0, 1)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


if __name__ == "__main__":
    for seed, sid in [(42, 0), (42, 1), (1, 0)]:
        vals = [output(seed, sid, n) for n in range(1, 5)]
        print(f"seed={seed} stream={sid}: " + ", ".join(f"0x{v:016X}ull" for v in vals))
    print("uniform01 of first two (42,0):",
          ", ".join(repr(uniform01(output(42, 0, n))) for n in (1, 2)))
    print("normal from draws 1,2 of (42,0):",
          repr(normal(output(42, 0, 1), output(42, 0, 2))))
