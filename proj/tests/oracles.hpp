/*
 Copyright 2026 gbsde contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#pragma once

// Frozen reference values, computed independently of the library.
namespace oracle {

// E[(W_1 - 0.5)+] for a standard Brownian motion: pdf(0.5) - 0.5 * sf(0.5).
inline constexpr double kCallHalfStrike = 0.19779655740130603;
// E[(W_1)+] = 1 / sqrt(2 pi).
inline constexpr double kCallAtTheMoney = 0.3989422804014327;
// Brute-force minimum of the explicit constant's objective over gamma in 1.01, 1.02, ... (alpha = delta = 1).
inline constexpr double kSongGridMin = 295.20252421357816;
inline constexpr double kSongGridArgmin = 1.40;
inline constexpr double kSongAlpha1Delta3 = 96.022110946346743;
inline constexpr double kSongAlpha2Delta1 = 779.81687668041229;

}  // namespace oracle
