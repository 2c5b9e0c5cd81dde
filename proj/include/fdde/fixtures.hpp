#pragma once

#include <string_view>

namespace fdde::fixtures {

/// α = 1/2 on [0,1] with the quadratic lag g(t) = t², history φ(t) = t on
/// [-1,0]. Lipschitz in both arguments with L = 1.
inline constexpr std::string_view quadratic_lag = R"(# D^(1/2) u = |u|/(1+|u|) + cos(u(t^2)),  u = t on [-1,0]
alpha = 0.5
T = 1
h = 1
f = abs(u)/(1+abs(u)) + cos(v)
g = t^2
phi = t
L = 1
lipschitz_mode = both
)";

/// α = 1/2 on [0,10] with the constant delay r = 1, history φ(t) = e^t.
/// Lipschitz in u only (L = 1); v² has no global constant. The solution
/// grows very fast, so the stop is relative to the solution's size.
inline constexpr std::string_view constant_delay = R"(# D^(1/2) u = sin(u) + u(t-1)^2,  u = exp(t) on [-1,0]
alpha = 0.5
T = 10
g = constant
r = 1
h = 1
f = sin(u) + v^2
phi = exp(t)
L = 1
lipschitz_mode = second_only
rho = 0.5
)";

}  // namespace fdde::fixtures
