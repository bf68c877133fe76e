#pragma once

namespace purcell {

// Public interfaces quote all frequencies as ordinary frequency (Hz).
// Angular factors of 2*pi are applied explicitly inside rate formulas.
inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// CODATA reduced Planck constant, J s.
inline constexpr double kHBar = 1.054571817e-34;

}  // namespace purcell
