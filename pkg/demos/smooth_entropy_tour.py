"""Tour of the one-shot entropic quantities on small random states.

Shows the hypothesis-testing divergence sandwiched between smooth and
plain max-relative entropies, the Neyman-Pearson/SDP agreement on the
optimal type-II error, and the one-shot entropy ordering.

Run:  python3 demos/smooth_entropy_tour.py
"""

import math

import numpy as np

from qrdkit.entropies import (beta_epsilon, d_h, d_max, h0, h_min,
                              smooth_d_max, von_neumann)
from qrdkit.states import random_density

rng = np.random.default_rng(20260817)
rho = random_density(rng, 3)
sigma = random_density(rng, 3)

print("random qutrit pair, all quantities in bits\n")

# the lower leg smooths over a ball of radius sqrt(2(1-eps)); below
# eps = 0.5 that radius reaches 1 and the bound degenerates to -inf,
# so the informative regime is eps close to 1
eps = 0.8
shift = math.log2(1.0 / (1.0 - eps))
lower = smooth_d_max(rho, sigma, math.sqrt(2.0 * (1.0 - eps))).value + shift
mid = d_h(rho, sigma, eps)
upper = d_max(rho, sigma) + shift
print(f"sandwich at eps = {eps}:")
print(f"  smooth D_max + log2(1/(1-eps)) = {lower:9.5f}")
print(f"  D_H^eps                        = {mid:9.5f}")
print(f"  D_max + log2(1/(1-eps))        = {upper:9.5f}")
print(f"  ordering holds: {lower <= mid + 1e-9 <= upper + 1e-9}\n")

b_np = beta_epsilon(rho, sigma, eps, method="np")
b_sdp = beta_epsilon(rho, sigma, eps, method="sdp")
print("optimal type-II error by two independent routes:")
print(f"  Neyman-Pearson threshold test: {b_np:.9f}")
print(f"  semidefinite program:          {b_sdp:.9f}")
print(f"  |difference| = {abs(b_np - b_sdp):.2e}\n")

r = random_density(rng, 4, rank=3)
print("one-shot entropy ordering on a rank-3 state of dimension 4:")
print(f"  H_0   = {h0(r):8.5f}")
print(f"  H     = {von_neumann(r):8.5f}")
print(f"  H_min = {h_min(r):8.5f}")
