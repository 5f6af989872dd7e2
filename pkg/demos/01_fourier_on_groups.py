# %% [markdown]
# # Fourier analysis on T^1, T^2 and SO(3)
#
# Every function on these groups is a sum over irreducible representations.
# The coefficient of a representation `pi` is a `d x d` matrix, `d = 1` on tori
# and `d = 2l + 1` on SO(3).  This demo builds a random band-limited function,
# moves it to a quadrature grid and back, and checks that convolution turns
# into a matrix product.

# %%
import numpy as np

from liedeconv.groups import SO3, TORUS1, enumerate_irreps, haar_sample_array
from liedeconv.harmonic import (
    FourierCoefficients,
    analyze,
    convolve,
    convolve_quadrature,
    grid_for_cutoff,
    l2_norm_sq,
    make_grid,
    synthesize_grid,
    synthesize_points,
)

rng = np.random.default_rng(0)

# %% [markdown]
# Irreps are listed by Laplace eigenvalue.  A cutoff `T` keeps every irrep with
# eigenvalue strictly below `T`.

# %%
for p in enumerate_irreps(SO3, 13):
    print(f"l={p.index}  dim={p.dim_pi}  lambda={p.lambda_pi}")


# %%
def random_coeffs(group, cutoff):
    return FourierCoefficients.from_function(
        group, cutoff,
        lambda p: rng.standard_normal((p.dim_pi, p.dim_pi)) + 1j * rng.standard_normal((p.dim_pi, p.dim_pi)))


# %% [markdown]
# ## Round trip and Parseval
#
# The grid returned by `grid_for_cutoff` integrates products of band-limited
# functions exactly, so analysis inverts synthesis and the two L2 norms agree.

# %%
for group, cutoff in ((TORUS1, 40.0), (SO3, 21.0)):
    c = random_coeffs(group, cutoff)
    f = synthesize_grid(c, grid_for_cutoff(group, cutoff))
    back = analyze(f, cutoff)
    print(f"{group.name}: grid {f.values.shape}, round trip {back.max_abs_diff(c):.1e}, "
          f"norms {l2_norm_sq(c):.6f} vs {f.norm_sq():.6f}")

# %% [markdown]
# ## Convolution
#
# `(f * h)(g) = int f(x) h(x^-1 g) dx`.  In coefficient space it is the
# product `c(f) c(h)`, which we compare with brute-force quadrature.

# %%
f = random_coeffs(SO3, 13)
h = random_coeffs(SO3, 13)
g = haar_sample_array(SO3, rng, 5)
direct = convolve_quadrature(lambda x: synthesize_points(f, x), lambda x: synthesize_points(h, x),
                             SO3, g, make_grid(SO3, 4))
via_coeffs = synthesize_points(convolve(f, h), g)
print(np.max(np.abs(direct - via_coeffs)))
